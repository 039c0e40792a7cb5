#include "doctest.h"

#include <random>

#include "support.hpp"
#include "tickgraph/lang.hpp"

using namespace tickgraph;

namespace {

const char* const minimal = R"(
ctrl A = 0;
atomic ctrl B = 0;
react r = A.B --> A.1;
big start = A.B;
begin abrs
  init start;
  rules = [ {r} ];
  actions = [ go = {r} ];
end
)";

SourcePos parse_error_at(const std::string& text, std::string* message = nullptr)
{
    try {
        (void)lang::parse(text);
    } catch (const ParseError& e) {
        if (message)
            *message = e.message();
        return e.pos();
    }
    FAIL("no parse error for: " << text);
    return {};
}

std::string elaboration_error(const std::string& text)
{
    try {
        (void)lang::load(text);
    } catch (const ElaborationError& e) {
        return e.message();
    }
    FAIL("no elaboration error for: " << text);
    return {};
}

std::string with_abrs(const std::string& decls, const std::string& abrs)
{
    return decls + "\nbegin abrs\n" + abrs + "\nend\n";
}

} // namespace

TEST_SUITE("lang")
{
    TEST_CASE("precedence: parallel below merge below nest")
    {
        const auto ast = lang::parse("big b = A.B | C || D;");
        const auto& body = std::get<lang::BigDecl>(ast.declarations.at(0)).body;
        REQUIRE(body.kind == lang::BigAst::Kind::parallel);
        CHECK(body.operands[0].kind == lang::BigAst::Kind::merge);
        CHECK(body.operands[0].operands[0].kind == lang::BigAst::Kind::nest);
        // Nesting is right-associative.
        const auto n = std::get<lang::BigDecl>(lang::parse("big b = A.B.C;").declarations[0]).body;
        CHECK(n.operands[1].kind == lang::BigAst::Kind::nest);
        // A closure scopes over everything to its right.
        const auto c = std::get<lang::BigDecl>(lang::parse("big b = /x /y A{x} || B{y};").declarations[0]).body;
        REQUIRE(c.kind == lang::BigAst::Kind::closure);
        CHECK(c.operands[0].kind == lang::BigAst::Kind::closure);
        CHECK(c.operands[0].operands[0].kind == lang::BigAst::Kind::parallel);
    }

    TEST_CASE("layout and comments do not affect the tree")
    {
        CHECK(lang::parse("big b=A{x}.(B|C);") == lang::parse("# c\nbig   b =\n  A{x} . ( B | C ) ; # d"));
        CHECK_FALSE(lang::parse("big b = A.(B|C);") == lang::parse("big b = A.B|C;"));
    }

    TEST_CASE("round trip of the corpus models")
    {
        for (const char* file : {"pta.big", "cloud.big", "sensor.big"}) {
            const auto text = support::read_file(support::model_file(file));
            const auto ast = lang::parse(text);
            const auto printed = lang::to_source(ast);
            CHECK(lang::parse(printed) == ast);
            CHECK(lang::to_source(lang::parse(printed)) == printed);
        }
        const auto w = lang::parse("react r = A -[1e-05]-> B; react s = A -[0.5]-> B;");
        CHECK(lang::parse(lang::to_source(w)) == w);
    }

    TEST_CASE("parse errors carry positions")
    {
        std::string msg;
        auto pos = parse_error_at("ctrl S = ;", &msg);
        CHECK(pos.line == 1);
        CHECK(pos.column == 10);
        CHECK(msg.find("expected") != std::string::npos);

        pos = parse_error_at("ctrl S = 1;\nbig b = S{x}.(A | ;\n");
        CHECK(pos.line == 2);
        CHECK(pos.column == 19);

        pos = parse_error_at("big b = A $ B;", &msg);
        CHECK(pos.column == 11);
        CHECK(msg.find("unexpected character") != std::string::npos);


        std::string deep = "big b = ";
        for (int i = 0; i < 300; ++i)
            deep += "(";
        deep += "A";
        for (int i = 0; i < 300; ++i)
            deep += ")";
        parse_error_at(deep + ";", &msg);
        CHECK(msg.find("deep") != std::string::npos);

        parse_error_at(with_abrs("", "init a; init b;"), &msg);
        CHECK(msg.find("duplicate") != std::string::npos);
    }

    TEST_CASE("minimal model elaborates")
    {
        const auto m = lang::load(minimal);
        CHECK(m.rule_count() == 1);
        CHECK(m.controls.size() == 2);
        CHECK(m.initial_name == "start");
        CHECK(m.actions.actions.size() == 1);
        CHECK(to_string(m.initial) == "A.B");
    }

    TEST_CASE("elaboration errors")
    {
        CHECK(elaboration_error("ctrl A = 0;") == "no abrs block");
        const std::string decls = "ctrl A = 0; atomic ctrl B = 0; react r = A.B --> A.1; big s = A.B;";
        CHECK(elaboration_error(with_abrs(decls, "init s; rules = [ {r} ];")).find("no actions") !=
              std::string::npos);
        CHECK(elaboration_error(with_abrs(decls, "init s; rules = [ {r}, {r} ]; actions = [ a = {r} ];"))
                  .find("two priority classes") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls, "init s; rules = [ {r} ]; actions = [ a = {r}, b = {r} ];"))
                  .find("two actions") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls, "init t; rules = [ {r} ]; actions = [ a = {r} ];"))
                  .find("undefined") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls + " big t = A{x};", "init t; rules = [ {r} ]; actions = [ a = {r} ];"))
                  .find("arity") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls + " big t = /z A.B;", "init t; rules = [ {r} ]; actions = [ a = {r} ];"))
                  .find("z") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls + " big t = t;", "init t; rules = [ {r} ]; actions = [ a = {r} ];"))
                  .find("in terms of itself") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls + " ctrl r = 0;", "init s;")).find("r") != std::string::npos);
        CHECK(elaboration_error(with_abrs("atomic fun ctrl K(n) = 0; fun react q(n) = K(n + 1) --> K(n); big s = K(0);",
                                          "int d = {0}; init s; rules = [ {q(d)} ]; actions = [ a = {q} ];"))
                  .find("only allowed in reactums") != std::string::npos);
        CHECK(elaboration_error(with_abrs(decls, "init s; rules = [ {r} ]; actions = [ stall = {r} ];"))
                  .find("reserved") != std::string::npos);
    }

    TEST_CASE("int sets and families")
    {
        const auto m = support::load_model("pta.big");
        CHECK(m.rule_count() == 20);
        CHECK(m.controls.size() == 6);
        CHECK(m.priorities.classes.size() == 2);
        CHECK(m.int_sets.at("n").size() == 9);
        CHECK(m.int_sets.at("maxWaitT") == std::vector<std::int64_t>{8});
        CHECK(to_string(m.initial) == "/_0 (S{_0}.Init || X(0){_0})");
        const auto instances = m.predicate_instances();
        CHECK(instances.size() == 13);
        CHECK(m.predicate("clock_X_3"));
        CHECK(m.predicate("clock_X_9"));
        CHECK_FALSE(m.predicate("clock_X"));
        CHECK_FALSE(m.predicate("clock_X_x"));
        CHECK_FALSE(m.predicate("nothing"));
        const std::int64_t v[] = {1, 2};
        CHECK(lang::predicate_label("p", v) == "p_1_2");
    }

    TEST_CASE("cloud model size")
    {
        const auto m = support::load_model("cloud.big");
        CHECK(m.rule_count() == 85310);
        CHECK(m.controls.size() == 18);
        CHECK(m.priorities.classes.size() == 4);
    }

    TEST_CASE("mutated sources fail cleanly")
    {
        const auto base = support::read_file(support::model_file("pta.big"));
        const std::string alphabet = "(){}[];,.|/-=>#\"0123456789 abcXS\n";
        std::mt19937_64 rng(99);
        std::size_t accepted = 0;
        for (int i = 0; i < 400; ++i) {
            std::string text = base;
            const int edits = 1 + static_cast<int>(rng() % 4);
            for (int e = 0; e < edits; ++e) {
                const std::size_t at = rng() % text.size();
                switch (rng() % 3) {
                case 0: text.erase(at, 1 + rng() % 8); break;
                case 1: text.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                default: text[at] = static_cast<char>(rng() % 256); break;
                }
            }
            try {
                (void)lang::load(text);
                ++accepted;
            } catch (const SourceError& e) {
                CHECK(e.pos().offset <= text.size());
                CHECK(e.pos().line >= 1);
            }
        }
        CHECK(accepted < 400);
    }
}
