#include "doctest.h"

#include <algorithm>

#include "support.hpp"
#include "tickgraph/error.hpp"
#include "tickgraph/verify.hpp"

using namespace tickgraph;

namespace {

// 0 -a-> {1: 0.5, 2: 0.5}, 0 -b-> 3; 2 -a-> 0; 1 (goal) and 3 absorbing.
Mdp toy()
{
    Mdp m;
    m.actions = {"a", "b"};
    m.states.resize(4);
    m.states[0].choices = {Choice{0, {{1, 0.5, {}}, {2, 0.5, {}}}}, Choice{1, {{3, 1.0, {}}}}};
    m.states[2].choices = {Choice{0, {{0, 1.0, {}}}}};
    m.states[1].deadlock = m.states[3].deadlock = true;
    m.label_names = {"goal"};
    m.labels = {{}, {0}, {}, {}};
    return m;
}

Property parse_one(const std::string& text) { return parse_properties(text).at(0).property; }

} // namespace

TEST_SUITE("verify")
{
    TEST_CASE("label expressions")
    {
        const Mdp m = toy();
        CHECK(satisfying(m, LabelExpr::name("goal")) == std::vector<bool>{false, true, false, false});
        CHECK(satisfying(m, LabelExpr::name("init")) == std::vector<bool>{true, false, false, false});
        CHECK(satisfying(m, LabelExpr::name("deadlock")) == std::vector<bool>{false, true, false, true});
        const auto e = LabelExpr::disjunction(LabelExpr::name("goal"), LabelExpr::negation(LabelExpr::name("deadlock")));
        CHECK(satisfying(m, e) == std::vector<bool>{true, true, true, false});
        CHECK(e.names() == std::vector<std::string>{"goal", "deadlock"});
        CHECK_THROWS_AS(satisfying(m, LabelExpr::name("nope")), UnknownLabel);
    }

    TEST_CASE("qualitative precomputation")
    {
        const Mdp m = toy();
        const auto goal = satisfying(m, LabelExpr::name("goal"));
        CHECK(prob0(m, goal, Optimum::min) == std::vector<bool>{true, false, true, true});
        CHECK(prob0(m, goal, Optimum::max) == std::vector<bool>{false, false, false, true});
        CHECK(prob1_all(m, goal) == std::vector<bool>{false, true, false, false});
    }

    TEST_CASE("reachability values")
    {
        const Mdp m = toy();
        const auto goal = LabelExpr::name("goal");
        CHECK(reach_prob(m, goal, Optimum::max) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(reach_prob(m, goal, Optimum::min) == 0.0);
        const auto v = reach_values(m, satisfying(m, goal), Optimum::max);
        CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(v[3] == 0.0);
    }

    TEST_CASE("property checks on the toy model")
    {
        const Mdp m = toy();
        CHECK(check(m, parse_one("P >= 0 [ F \"goal\" ]")).holds);
        CHECK_FALSE(check(m, parse_one("P > 0 [ F \"goal\" ]")).holds);
        CHECK(check(m, parse_one("P <= 1 [ F \"goal\" ]")).holds);
        CHECK_FALSE(check(m, parse_one("P < 1 [ F \"goal\" ]")).holds);
        CHECK(check(m, parse_one("E [ F \"goal\" ]")).holds);
        CHECK_FALSE(check(m, parse_one("A [ F \"goal\" ]")).holds);
        CHECK_FALSE(check(m, parse_one("A [ G !\"goal\" ]")).holds);
        CHECK(check(m, parse_one("A [ G !(\"goal\" & \"init\") ]")).holds);
        // Not every path reaches the trigger.
        CHECK_FALSE(check(m, parse_one("FORCEDNEXT \"goal\" -> \"goal\"")).holds);
        CHECK(check(m, parse_one("FORCEDNEXT \"init\" -> true")).holds);
        const Verdict v = check(m, parse_one("FORCEDNEXT \"init\" -> !\"deadlock\""));
        CHECK_FALSE(v.holds);
        CHECK(v.detail.find("state 0") != std::string::npos);
    }

    TEST_CASE("property parser")
    {
        const auto lines = parse_properties("# header\n\nP>=0.99[F \"a\" & !\"b\"]  # trailing\nA [ G !\"x\" ]\n");
        REQUIRE(lines.size() == 2);
        CHECK(lines[0].pos.line == 3);
        CHECK(to_string(lines[0].property) == "P >= 0.99 [ F \"a\" & !\"b\" ]");
        REQUIRE(std::holds_alternative<Safety>(lines[1].property));
        CHECK(std::get<Safety>(lines[1].property).bad.to_string() == "\"x\"");
        CHECK(label_names(lines[0].property) == std::vector<std::string>{"a", "b"});
        // The parsed form prints back to something that parses the same.
        for (const auto& l : lines)
            CHECK(to_string(parse_one(to_string(l.property))) == to_string(l.property));

        try {
            (void)parse_properties("P >= 0.5 [ F \"a\" ]\nP >= [ F \"a\" ]\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.pos().line == 2);
            CHECK(e.pos().column == 6);
        }
        CHECK_THROWS_AS(parse_properties("P >= 1.5 [ F \"a\" ]"), ParseError);
        CHECK_THROWS_AS(parse_properties("A [ G \"a\""), ParseError);
        CHECK_THROWS_AS(parse_properties("FORCEDNEXT \"a\""), ParseError);
    }

    TEST_CASE("labelling with patterns")
    {
        const auto model = support::load_model("pta.big");
        Mdp m = support::build(model);
        label(m, model.predicate_instances());
        CHECK(m.label_names.size() == 13);
        CHECK(m.label_names.front() == "in_Init_state");
        CHECK(m.label_names.back() == "clock_X_8");
        const auto done = satisfying(m, LabelExpr::name("in_Done_state"));
        CHECK(std::count(done.begin(), done.end(), true) == 1);
    }
}
