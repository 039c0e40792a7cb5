#include "doctest.h"

#include "support.hpp"
#include "tickgraph/clocks.hpp"
#include "tickgraph/error.hpp"

using namespace tickgraph;

namespace {
const Control S{"S", 1, false, false};
const Control X{"X", 1, true, true};
const Control Init{"Init", 0, true, false};
const Control Send{"Send", 0, true, false};

ClockConfig pta_config()
{
    ClockConfig cfg;
    cfg.max_time = 9;
    cfg.timed = {{"S", "c"}};
    cfg.global_clock = false;
    cfg.local_control = "X";
    cfg.container.clear();
    return cfg;
}

const RuleFamily& family(const lang::Model& m, const std::string& base, std::size_t cls)
{
    for (const auto& f : m.priorities.classes.at(cls))
        if (f.base_name() == base)
            return f;
    FAIL("no family " << base);
    throw 0;
}

void check_same_instances(const RuleFamily& generated, const RuleFamily& written)
{
    const auto a = expand(generated);
    const auto b = expand(written);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK(is_iso(a[i].redex, b[i].redex));
        CHECK(is_iso(a[i].reactum, b[i].reactum));
        CHECK(a[i].weight == b[i].weight);
    }
}
} // namespace

TEST_SUITE("clocks")
{
    TEST_CASE("config checks")
    {
        ClockConfig cfg;
        cfg.max_time = 0;
        CHECK_THROWS_AS(cfg.check(), ConstructionError);
        cfg.max_time = 4;
        cfg.tick_step = 2;
        CHECK(cfg.advance_domain() == std::vector<std::int64_t>{0, 2});
        cfg.timed = {{"S", "c"}, {"T", "c"}};
        CHECK_THROWS_AS(cfg.check(), ConstructionError);
    }

    TEST_CASE("perspective adds closed clocks")
    {
        const Bigraph sys = nest(ion(S, std::nullopt, {"c"}), ion(Init, std::nullopt, {}));
        ClockConfig cfg;
        cfg.max_time = 3;
        cfg.timed = {{"S", "c"}};
        const Bigraph b = build_clock_perspective(sys, cfg);
        CHECK(b.regions == 2);
        CHECK(b.outer_names().empty());
        CHECK(validate(b).empty());
        CHECK(to_string(b).find("GC(0)") != std::string::npos);
        ClockConfig missing = cfg;
        missing.timed = {{"S", "z"}};
        CHECK_THROWS_AS(build_clock_perspective(sys, missing), ConstructionError);

        const Bigraph pta = build_clock_perspective(sys, pta_config());
        CHECK(is_iso(pta, support::load_model("pta.big").initial));
    }

    TEST_CASE("generated clock advance equals the hand-written PTA rule")
    {
        const auto m = support::load_model("pta.big");
        check_same_instances(gen_clock_advance(pta_config()), family(m, "clock_advance", 1));
    }

    TEST_CASE("timed_rule with an open link equals hand-written PTA rules")
    {
        const auto m = support::load_model("pta.big");
        auto base = std::make_shared<RuleTemplate>();
        base->name = "init_transition";
        base->redex = nest(ion(S, std::nullopt, {"c"}), ion(Init, std::nullopt, {}));
        base->reactum = nest(ion(S, std::nullopt, {"c"}), ion(Send, std::nullopt, {}));
        const RuleFamily timed = timed_rule(RuleFamily{base, {}}, "c", {1, 0}, true, X, false);
        CHECK(timed.rule->params == std::vector<std::string>{"n"});
        check_same_instances(timed, family(m, "init_transition", 1));

        const RuleFamily closed = timed_rule(RuleFamily{base, {}}, "c", {0}, true, X);
        CHECK(expand(closed)[0].redex.outer_names().empty());
        CHECK_THROWS_AS(timed_rule(RuleFamily{base, {}}, "z", {0}, true, X), RewriteError);
        CHECK_THROWS_AS(timed_rule(RuleFamily{base, {}}, "c", {}, true, X), RewriteError);
    }

    TEST_CASE("encode_invariant splits the deadline instance")
    {
        auto base = std::make_shared<RuleTemplate>();
        base->name = "go";
        base->redex = nest(ion(S, std::nullopt, {"c"}), ion(Init, std::nullopt, {}));
        base->reactum = nest(ion(S, std::nullopt, {"c"}), ion(Send, std::nullopt, {}));
        ClockConfig cfg = pta_config();
        const RuleFamily timed = timed_rule(RuleFamily{base, {}}, "c", cfg.advance_domain(), false, X, false);
        const PrioritySpec p = encode_invariant(timed, GuardSpec{"go", 2, 5, true}, cfg);
        REQUIRE(p.classes.size() == 2);
        REQUIRE(p.classes[0].size() == 1);
        CHECK(p.classes[0][0].domains.back() == std::vector<std::int64_t>{5});
        REQUIRE(p.classes[1].size() == 2);
        CHECK(p.classes[1][0].base_name() == "clock_advance");
        CHECK(p.classes[1][1].domains.back() == std::vector<std::int64_t>{2, 3, 4});

        const PrioritySpec loose = encode_invariant(timed, GuardSpec{"go", 2, 5, false}, cfg);
        CHECK(loose.classes[0].empty());
        CHECK(loose.classes[1][1].domains.back() == std::vector<std::int64_t>{2, 3, 4, 5});
        CHECK_THROWS_AS(encode_invariant(timed, GuardSpec{"go", 5, 2, true}, cfg), RewriteError);

        const PrioritySpec both[] = {p, p};
        const PrioritySpec merged = combine(both);
        CHECK(merged.classes[0].size() == 1);
        CHECK(merged.classes[1].size() == 2);
    }

    TEST_CASE("clock advance moves every clock together")
    {
        ClockConfig cfg;
        cfg.max_time = 2;
        cfg.timed = {{"S", "a"}, {"S", "b"}};
        const RuleFamily f = gen_clock_advance(cfg);
        CHECK(f.rule->params == std::vector<std::string>{"n1", "n2", "n"});
        const auto rs = expand(f);
        CHECK(rs.size() == 8);
        CHECK(rs.front().name == "clock_advance(0,0,0)");
        std::int64_t sum = 0;
        for (const auto& e : rs.back().reactum.entities)
            if (e.param)
                sum += *e.param;
        CHECK(sum == 6);
    }
}
