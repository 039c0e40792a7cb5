// Property tests: the library against the brute-force references.

#include "doctest.h"

#include <random>

#include "oracle.hpp"
#include "support.hpp"
#include "tickgraph/match.hpp"

using namespace tickgraph;

TEST_SUITE("oracle")
{
    TEST_CASE("matcher agrees with brute force on random bigraphs")
    {
        std::mt19937_64 rng(1);
        std::size_t total = 0;
        for (int i = 0; i < 500; ++i) {
            const Bigraph agent = oracle::random_agent(rng, 6);
            const Bigraph pattern = oracle::random_pattern(rng, agent, 3);
            const auto fast = occurrences(agent, pattern);
            const auto slow = oracle::brute_occurrences(agent, pattern);
            INFO(to_string(agent), " / ", to_string(pattern));
            CHECK(fast == slow);
            for (const auto& m : fast)
                CHECK(is_occurrence(agent, pattern, m));
            total += slow.size();
        }
        CHECK(total > 100);
    }

    TEST_CASE("canonical form is invariant and complete on random bigraphs")
    {
        std::mt19937_64 rng(2);
        std::size_t distinct = 0;
        for (int i = 0; i < 1000; ++i) {
            const Bigraph a = oracle::random_agent(rng, 7);
            const Bigraph b = oracle::shuffle(rng, a);
            REQUIRE(oracle::brute_iso(a, b));
            CHECK(canonical_form(a) == canonical_form(b));
            CHECK(oracle::brute_iso(a, decode(canonical_form(a))));
            const Bigraph c = oracle::random_agent(rng, 7);
            const bool iso = oracle::brute_iso(a, c);
            INFO(to_string(a), " vs ", to_string(c));
            CHECK((canonical_form(a) == canonical_form(c)) == iso);
            CHECK(is_iso(a, c) == iso);
            distinct += iso ? 0 : 1;
        }
        CHECK(distinct > 500);
    }

    TEST_CASE("explorer agrees with brute force on the corpus")
    {
        for (const char* file : {"pta.big", "sensor.big", "cloud.big"}) {
            const auto model = support::load_model(file);
            const auto brute = oracle::brute_explore(model.initial, model.priorities, model.actions);
            for (unsigned jobs : {1u, 3u}) {
                const Mdp m = support::build(model, jobs);
                INFO(file, " jobs ", jobs);
                CHECK(oracle::compare(brute, m) == "");
            }
        }
    }

    TEST_CASE("explorer agrees with brute force on small random systems")
    {
        const auto src = [](int k) {
            return "ctrl A = 0; ctrl B = 1; atomic fun ctrl K(n) = 0;\n"
                   "fun react grow(n) = A.K(n) -[" + std::to_string(k) + "]-> A.(K(n) | K(n + 1));\n"
                   "fun react shrink(n) = K(n) | K(n) --> K(n);\n"
                   "react wrap = B{x}.K(1) -[2]-> B{x}.A.K(1);\n"
                   "big s = /l (A.K(0) | B{l}.K(1));\n"
                   "begin abrs int d = {0,1}; init s;\n"
                   "rules = [ {shrink(d)}, {grow(d), wrap} ];\n"
                   "actions = [ g = {grow, wrap}, s = {shrink} ];\nend\n";
        };
        for (int k : {1, 3}) {
            const auto model = tickgraph::lang::load(src(k));
            const auto brute = oracle::brute_explore(model.initial, model.priorities, model.actions, 500);
            ExploreLimits lim;
            lim.max_states = 500;
            const Mdp m = explore(model.system(), lim);
            CHECK(oracle::compare(brute, m) == "");
        }
    }
}
