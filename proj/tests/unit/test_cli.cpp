#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "support.hpp"
#include "tickgraph/cli.hpp"

using support::cli;
using tickgraph::cli::ExitCode;

namespace {
std::string write_temp(const std::string& dir, const std::string& name, const std::string& text)
{
    const std::string path = dir + "/" + name;
    std::ofstream(path) << text;
    return path;
}
} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("validate")
    {
        const auto r = cli({"validate", support::model_file("pta.big")});
        CHECK(r.code == ExitCode::ok);
        CHECK(r.out.find("20 rules, 6 controls, 2 priority classes, 5 actions") != std::string::npos);
    }

    TEST_CASE("usage errors")
    {
        CHECK(cli({}).code == ExitCode::usage_error);
        CHECK(cli({"frobnicate"}).code == ExitCode::usage_error);
        CHECK(cli({"build"}).code == ExitCode::usage_error);
        CHECK(cli({"build", "/nonexistent/model.big"}).code == ExitCode::usage_error);
        CHECK(cli({"export", support::model_file("pta.big"), "--format", "xml"}).code == ExitCode::usage_error);
    }

    TEST_CASE("model errors report a position")
    {
        const auto dir = support::temp_dir("cli");
        const auto empty = write_temp(dir, "empty.big", "");
        auto r = cli({"validate", empty});
        CHECK(r.code == ExitCode::usage_error);
        CHECK(r.err.find("no abrs block") != std::string::npos);

        const auto bad = write_temp(dir, "bad.big", "ctrl S = ;\n");
        r = cli({"validate", bad, "--json"});
        CHECK(r.code == ExitCode::usage_error);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["ok"] == false);
        CHECK(j["exit_code"] == 2);
        CHECK(j["diagnostics"][0]["line"] == 1);
        CHECK(j["diagnostics"][0]["column"] == 10);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("build and cache")
    {
        const auto dir = support::temp_dir("cli");
        const auto model = support::model_file("pta.big");
        const auto first = cli({"build", model, "--out", dir});
        CHECK(first.code == ExitCode::ok);
        CHECK(first.out.find("14 states, 20 choices, 21 transitions, 0 deadlocks") != std::string::npos);
        CHECK(std::filesystem::exists(dir + "/pta.mdpc"));
        const auto second = cli({"build", model, "--out", dir});
        CHECK(second.out == first.out);
        const auto j = nlohmann::json::parse(cli({"build", model, "--out", dir, "--json"}).out);
        CHECK(j["states"] == 14);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("state budget")
    {
        const auto r = cli({"build", support::model_file("cloud.big"), "--max-states", "5", "--no-cache"});
        CHECK(r.code == ExitCode::resource_limit);
        CHECK(r.err.find("budget") != std::string::npos);
    }

    TEST_CASE("check exit codes")
    {
        const auto dir = support::temp_dir("cli");
        const auto model = support::model_file("pta.big");
        auto r = cli({"check", model, "--props", support::model_file("pta.props"), "--out", dir});
        CHECK(r.code == ExitCode::ok);
        CHECK(r.out.find("FAILS") == std::string::npos);

        const auto failing = write_temp(dir, "f.props", "P >= 0.5 [ F \"in_Wait_state\" ]\n");
        r = cli({"check", model, "--props", failing, "--out", dir});
        CHECK(r.code == ExitCode::property_failed);
        CHECK(r.out.rfind("FAILS", 0) == 0);

        const auto unknown = write_temp(dir, "u.props", "E [ F \"no_such_label\" ]\n");
        r = cli({"check", model, "--props", unknown, "--out", dir});
        CHECK(r.code == ExitCode::usage_error);

        const auto garbled = write_temp(dir, "g.props", "P >= [ F \"x\" ]\n");
        r = cli({"check", model, "--props", garbled, "--out", dir, "--json"});
        CHECK(r.code == ExitCode::usage_error);
        CHECK(nlohmann::json::parse(r.out)["diagnostics"][0]["line"] == 1);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("export writes prism and dot files")
    {
        const auto dir = support::temp_dir("cli");
        const auto model = support::model_file("sensor.big");
        CHECK(cli({"export", model, "--out", dir}).code == ExitCode::ok);
        for (const char* ext : {".tra", ".lab", ".sta"})
            CHECK(std::filesystem::exists(dir + "/sensor" + ext));
        CHECK(cli({"export", model, "--out", dir, "--format", "dot"}).code == ExitCode::ok);
        CHECK(support::read_file(dir + "/sensor.dot").rfind("digraph", 0) == 0);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("simulate")
    {
        const auto r = cli({"simulate", support::model_file("sensor.big"), "--seed", "3", "--steps", "5"});
        CHECK(r.code == ExitCode::ok);
        CHECK(r.out.rfind("step,action,rule,hash", 0) == 0);
        CHECK(r.out.find("deadlock at step 1") != std::string::npos);
    }

    TEST_CASE("trivial and faulty models")
    {
        const auto dir = support::temp_dir("cli");
        const auto still = write_temp(dir, "still.big",
                                      "ctrl A = 0; ctrl B = 0; react r = B --> B; big s = A;\n"
                                      "begin abrs init s; rules = [ {r} ]; actions = [ a = {r} ]; end\n");
        auto r = cli({"build", still, "--out", dir});
        CHECK(r.code == ExitCode::ok);
        CHECK(r.out.find("1 state, 0 choices, 0 transitions, 1 deadlock\n") != std::string::npos);
        r = cli({"simulate", still, "--seed", "1", "--steps", "10"});
        CHECK(r.out == "step,action,rule,hash\ndeadlock at step 0\n");

        const auto unknown = write_temp(dir, "unknown.big",
                                        "ctrl A = 0;\nbig s = A.Q;\nreact r = A --> A;\n"
                                        "begin abrs init s; rules = [ {r} ]; actions = [ a = {r} ]; end\n");
        r = cli({"validate", unknown});
        CHECK(r.code == ExitCode::usage_error);
        CHECK(r.err.find("unknown.big:2:11:") != std::string::npos);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("failing property reports its probability")
    {
        const auto dir = support::temp_dir("cli");
        const auto props = write_temp(dir, "w.props", "P >= 1.0 [ F \"in_Wait_state\" ]\n");
        const auto r = cli({"check", support::model_file("pta.big"), "--props", props, "--out", dir});
        CHECK(r.code == ExitCode::property_failed);
        CHECK(r.out.find("0.01") != std::string::npos);
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("PTA runs start with tick or rec")
    {
        for (int seed = 0; seed < 20; ++seed) {
            const auto r = cli({"simulate", support::model_file("pta.big"), "--seed", std::to_string(seed), "--steps", "1"});
            REQUIRE(r.code == ExitCode::ok);
            const auto line = r.out.substr(r.out.find('\n') + 1);
            const bool ok = line.rfind("0,tick,", 0) == 0 || line.rfind("0,rec,", 0) == 0;
            CHECK(ok);
        }
    }
}
