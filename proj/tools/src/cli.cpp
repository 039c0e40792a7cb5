#include "tickgraph/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tickgraph/lang.hpp"
#include "tickgraph/mdp.hpp"
#include "tickgraph/verify.hpp"

namespace tickgraph::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bumped whenever the meaning of a cached MDP changes.
constexpr std::uint64_t cache_salt = 1;

struct Options {
    std::string command;
    std::string model_path;
    std::string props_path;
    std::string format = "prism";
    std::size_t max_states = 100000;
    bool fix_deadlocks = false;
    std::uint64_t seed = 0;
    std::size_t steps = 100;
    std::string out_dir = ".";
    unsigned jobs = 1;
    bool json = false;
    bool no_cache = false;
};

/// Failure with a fixed exit code; `where` is a source position if known.
struct Failure {
    int code;
    std::string kind;
    std::string message;
    std::optional<SourcePos> where;
    std::string file;
};

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string plural(std::size_t n, const char* word)
{
    return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Failure{usage_error, "io", "cannot read " + path, std::nullopt, {}};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw Failure{usage_error, "io", "cannot write " + path.string(), std::nullopt, {}};
}

class Runner {
public:
    Runner(Options o, std::ostream& out, std::shared_ptr<spdlog::logger> log)
        : o_(std::move(o)), out_(out), log_(std::move(log))
    {
    }

    int run()
    {
        if (o_.command == "validate")
            return validate();
        if (o_.command == "build")
            return build();
        if (o_.command == "export")
            return export_files();
        if (o_.command == "check")
            return check_props();
        return simulate();
    }

private:
    const lang::Model& model()
    {
        if (model_)
            return *model_;
        source_ = read_file(o_.model_path);
        try {
            model_ = lang::load(source_);
        } catch (const ParseError& e) {
            throw Failure{usage_error, "parse", e.message(), e.pos(), o_.model_path};
        } catch (const ElaborationError& e) {
            throw Failure{usage_error, "elaboration", e.message(), e.pos(), o_.model_path};
        }
        log_->debug("elaborated {}: {} rules, {} controls", o_.model_path, model_->rule_count(),
                    model_->controls.size());
        return *model_;
    }

    const ReactiveSystem& system()
    {
        if (!system_) {
            try {
                system_ = model().system();
            } catch (const RewriteError& e) {
                throw Failure{usage_error, "elaboration", e.what(), std::nullopt, o_.model_path};
            }
        }
        return *system_;
    }

    std::uint64_t cache_key()
    {
        model();
        std::uint64_t k = fnv1a64(source_);
        const std::string flags = std::to_string(cache_salt) + ":" + std::to_string(o_.max_states) + ":" +
                                  (o_.fix_deadlocks ? "fix" : "keep");
        return fnv1a64(flags, k);
    }

    fs::path out_path(const std::string& ext) const
    {
        return fs::path(o_.out_dir) / (fs::path(o_.model_path).stem().string() + ext);
    }

    // Explores the model, reusing the cache file when its key matches.
    const Mdp& mdp()
    {
        if (mdp_)
            return *mdp_;
        const std::uint64_t key = cache_key();
        const fs::path cache = out_path(".mdpc");
        if (!o_.no_cache && fs::exists(cache)) {
            try {
                if (auto m = deserialize(read_file(cache.string()), key)) {
                    log_->info("loaded {} states from {}", m->states.size(), cache.string());
                    mdp_ = std::move(*m);
                    cache_bytes_ = serialize(*mdp_, key);
                    return *mdp_;
                }
                log_->info("cache {} is stale, rebuilding", cache.string());
            } catch (const std::exception& e) {
                log_->warn("ignoring unreadable cache {}: {}", cache.string(), e.what());
            }
        }
        ExploreLimits limits;
        limits.max_states = o_.max_states;
        limits.fix_deadlocks = o_.fix_deadlocks;
        limits.jobs = std::max(1u, o_.jobs);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            mdp_ = explore(system(), limits);
        } catch (const BudgetExceeded& e) {
            throw Failure{resource_limit, "budget", e.what(), std::nullopt, {}};
        }
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
        log_->info("explored {} states in {} ms", mdp_->states.size(), ms);
        cache_bytes_ = serialize(*mdp_, key);
        if (!o_.no_cache) {
            fs::create_directories(o_.out_dir);
            write_file(cache, cache_bytes_);
        }
        return *mdp_;
    }

    std::vector<std::string> initial_actions()
    {
        std::vector<std::string> out;
        const Mdp& m = mdp();
        if (!m.states.empty())
            for (const auto& c : m.states[0].choices)
                out.push_back(m.actions[c.action]);
        return out;
    }

    int validate()
    {
        const auto& m = model();
        system();
        const auto classes = m.priorities.classes.size();
        if (o_.json) {
            out_ << json{{"ok", true},
                         {"rules", m.rule_count()},
                         {"controls", m.controls.size()},
                         {"classes", classes},
                         {"actions", m.actions.actions.size()},
                         {"predicates", m.predicates.size()}}
                        .dump()
                 << "\n";
        } else {
            out_ << o_.model_path << ": " << m.rule_count() << " rules, " << plural(m.controls.size(), "control")
                 << ", " << classes << (classes == 1 ? " priority class, " : " priority classes, ")
                 << plural(m.actions.actions.size(), "action") << "\n";
        }
        return ok;
    }

    int build()
    {
        const Mdp& m = mdp();
        const auto acts = initial_actions();
        const std::string digest = hex64(fnv1a64(cache_bytes_));
        if (o_.json) {
            out_ << json{{"states", m.states.size()},
                         {"choices", m.choice_count()},
                         {"transitions", m.transition_count()},
                         {"deadlocks", m.deadlock_count()},
                         {"initial_actions", acts},
                         {"cache_digest", digest}}
                        .dump()
                 << "\n";
            return ok;
        }
        out_ << plural(m.states.size(), "state") << ", " << plural(m.choice_count(), "choice") << ", "
             << plural(m.transition_count(), "transition") << ", " << plural(m.deadlock_count(), "deadlock") << "\n";
        out_ << "initial actions: {";
        for (std::size_t i = 0; i < acts.size(); ++i)
            out_ << (i ? ", " : "") << acts[i];
        out_ << "}\n";
        out_ << "cache digest: " << digest << "\n";
        return ok;
    }

    // Every predicate instance over its declared domains.
    Mdp labelled_all()
    {
        Mdp m = mdp();
        const auto patterns = model().predicate_instances();
        label(m, patterns);
        return m;
    }

    int export_files()
    {
        fs::create_directories(o_.out_dir);
        std::vector<std::string> written;
        if (o_.format == "dot") {
            const auto p = out_path(".dot");
            write_file(p, export_dot(labelled_all()));
            written.push_back(p.string());
        } else {
            const auto files = export_prism(labelled_all());
            for (const auto& [ext, text] : {std::pair{".tra", &files.tra}, {".lab", &files.lab}, {".sta", &files.sta}}) {
                const auto p = out_path(ext);
                write_file(p, *text);
                written.push_back(p.string());
            }
        }
        if (o_.json)
            out_ << json{{"files", written}}.dump() << "\n";
        else
            for (const auto& w : written)
                out_ << "wrote " << w << "\n";
        return ok;
    }

    int check_props()
    {
        if (o_.props_path.empty())
            throw Failure{usage_error, "usage", "check needs --props FILE", std::nullopt, {}};
        const std::string text = read_file(o_.props_path);
        std::vector<PropertyLine> props;
        try {
            props = parse_properties(text);
        } catch (const ParseError& e) {
            throw Failure{usage_error, "parse", e.message(), e.pos(), o_.props_path};
        }
        // Label only with the predicates the properties mention.
        std::vector<Pattern> patterns;
        for (const auto& p : props)
            for (const auto& name : label_names(p.property)) {
                if (name == "init" || name == "deadlock")
                    continue;
                if (std::any_of(patterns.begin(), patterns.end(), [&](const Pattern& q) { return q.name == name; }))
                    continue;
                auto pat = model().predicate(name);
                if (!pat)
                    throw Failure{usage_error, "unknown_predicate", "unknown predicate \"" + name + "\"", p.pos,
                                  o_.props_path};
                patterns.push_back(std::move(*pat));
            }
        Mdp m = mdp();
        label(m, patterns);
        bool all = true;
        json results = json::array();
        for (const auto& p : props) {
            const Verdict v = check(m, p.property);
            all = all && v.holds;
            if (o_.json) {
                json r{{"property", to_string(p.property)}, {"holds", v.holds}, {"detail", v.detail}};
                if (v.value)
                    r["value"] = *v.value;
                results.push_back(r);
            } else {
                out_ << (v.holds ? "HOLDS " : "FAILS ") << to_string(p.property) << "  (" << v.detail << ")\n";
            }
        }
        if (o_.json)
            out_ << json{{"all_hold", all}, {"results", results}}.dump() << "\n";
        return all ? ok : property_failed;
    }

    int simulate()
    {
        const Trace t = tickgraph::simulate(system(), o_.seed, o_.steps);
        if (o_.json) {
            json steps = json::array();
            for (const auto& s : t.steps)
                steps.push_back({{"step", s.step}, {"action", s.action}, {"rule", s.rule}, {"hash", hex64(s.state_digest)}});
            json j{{"seed", o_.seed}, {"steps", steps}};
            if (t.deadlock_at)
                j["deadlock_at"] = *t.deadlock_at;
            out_ << j.dump() << "\n";
            return ok;
        }
        out_ << "step,action,rule,hash\n";
        for (const auto& s : t.steps)
            out_ << s.step << "," << s.action << "," << s.rule << "," << hex64(s.state_digest) << "\n";
        if (t.deadlock_at)
            out_ << "deadlock at step " << *t.deadlock_at << "\n";
        return ok;
    }

    Options o_;
    std::ostream& out_;
    std::shared_ptr<spdlog::logger> log_;
    std::string source_;
    std::optional<lang::Model> model_;
    std::optional<ReactiveSystem> system_;
    std::optional<Mdp> mdp_;
    std::string cache_bytes_;
};

spdlog::level::level_enum log_level()
{
    const char* env = std::getenv("TICKGRAPH_LOG");
    const std::string v = env ? env : "warn";
    if (v == "error")
        return spdlog::level::err;
    if (v == "info")
        return spdlog::level::info;
    if (v == "debug")
        return spdlog::level::debug;
    return spdlog::level::warn;
}

void report(const Failure& f, bool as_json, std::ostream& out, std::ostream& err)
{
    if (as_json) {
        json d{{"kind", f.kind}, {"message", f.message}};
        if (!f.file.empty())
            d["file"] = f.file;
        if (f.where) {
            d["line"] = f.where->line;
            d["column"] = f.where->column;
        }
        out << json{{"ok", false}, {"exit_code", f.code}, {"diagnostics", json::array({d})}}.dump() << "\n";
        return;
    }
    if (!f.file.empty())
        err << f.file << ":";
    if (f.where)
        err << f.where->line << ":" << f.where->column << ":";
    err << (f.file.empty() && !f.where ? "" : " ") << "error: " << f.message << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Action bigraphical reactive systems with digital clocks", "tickgraph"};
    app.require_subcommand(1);
    const std::pair<const char*, const char*> commands[] = {
        {"validate", "Parse and elaborate a model"},
        {"build", "Explore the MDP and cache it"},
        {"export", "Write PRISM explicit (.tra/.lab/.sta) or DOT files"},
        {"check", "Check the properties in --props"},
        {"simulate", "Print a random run"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("model", o.model_path, "Model file (.big)")->required();
        sub->add_option("--props", o.props_path, "Property file");
        sub->add_option("--format", o.format, "Export format")->check(CLI::IsMember({"prism", "dot"}));
        sub->add_option("--max-states", o.max_states, "State budget")->check(CLI::PositiveNumber);
        sub->add_flag("--fix-deadlocks", o.fix_deadlocks, "Add stall self-loops to deadlock states");
        sub->add_option("--seed", o.seed, "Simulation seed");
        sub->add_option("--steps", o.steps, "Simulation length");
        sub->add_option("--out", o.out_dir, "Output and cache directory");
        sub->add_option("--jobs", o.jobs, "Exploration threads")->check(CLI::PositiveNumber);
        sub->add_flag("--json", o.json, "Machine-readable output");
        sub->add_flag("--no-cache", o.no_cache, "Neither read nor write the MDP cache");
    }
    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run 'tickgraph --help' for usage\n";
        return usage_error;
    }
    o.command = app.get_subcommands().front()->get_name();

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto log = std::make_shared<spdlog::logger>("tickgraph", sink);
    log->set_level(log_level());
    log->set_pattern("[%l] %v");

    const bool as_json = o.json;
    try {
        return Runner(std::move(o), out, log).run();
    } catch (const Failure& f) {
        report(f, as_json, out, err);
        return f.code;
    } catch (const BudgetExceeded& e) {
        report({resource_limit, "budget", e.what(), std::nullopt, {}}, as_json, out, err);
        return resource_limit;
    } catch (const UnknownLabel& e) {
        report({usage_error, "unknown_predicate", e.what(), std::nullopt, {}}, as_json, out, err);
        return usage_error;
    } catch (const fs::filesystem_error& e) {
        report({usage_error, "io", e.what(), std::nullopt, {}}, as_json, out, err);
        return usage_error;
    } catch (const Error& e) {
        report({usage_error, "model", e.what(), std::nullopt, {}}, as_json, out, err);
        return usage_error;
    }
}

} // namespace tickgraph::cli
