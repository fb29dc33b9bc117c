#include "lexrule/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lexrule/http_service.hpp"
#include "lexrule/loader.hpp"
#include "lexrule/proleg_bridge.hpp"
#include "lexrule/reasoner.hpp"
#include "lexrule/strategy_lab.hpp"

namespace lexrule::cli {

namespace {

// Thrown inside subcommand handlers to leave with a specific exit code.
struct Abort {
    int code;
};

struct Globals {
    bool quiet = false;
    std::string format = "text";
    bool json() const { return format == "json"; }
};

std::string load(const std::string& path, std::ostream& err) {
    try {
        return read_file(path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        throw Abort{kUsage};
    }
}

std::vector<Rule> load_rules(const std::string& path, std::ostream& err) {
    auto text = load(path, err);
    try {
        return parse_rule_file(text);
    } catch (const Error& e) {
        err << "error: " << path << ": " << e.what() << "\n";
        throw Abort{kUsage};
    }
}

FactFile load_facts(const std::string& path, std::ostream& err) {
    auto text = load(path, err);
    try {
        return parse_fact_file(text);
    } catch (const Error& e) {
        err << "error: " << path << ": " << e.what() << "\n";
        throw Abort{kUsage};
    }
}

void print_diagnostics(const std::vector<Diagnostic>& diags, const Globals& g, std::ostream& out) {
    if (g.json()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& d : diags)
            arr.push_back({{"severity", std::string(to_string(d.severity))},
                           {"code", d.code},
                           {"subject", d.subject},
                           {"message", d.message}});
        out << arr.dump() << "\n";
        return;
    }
    for (const auto& d : diags)
        out << d.render() << "\n";
}

void write_output(const std::string& path, const std::string& content, std::ostream& out,
                  std::ostream& err) {
    if (path.empty()) {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!(f << content)) {
        err << "error: cannot write '" << path << "'\n";
        throw Abort{kUsage};
    }
}

int cmd_validate(const std::string& rules_path, const std::string& facts_path, const Globals& g,
                 std::ostream& out, std::ostream& err) {
    auto rules = load_rules(rules_path, err);
    std::optional<FactFile> facts;
    if (!facts_path.empty())
        facts = load_facts(facts_path, err);
    auto result = validate(rules, facts ? &facts->facts : nullptr);
    auto diags = result.diagnostics;
    if (facts)
        diags.insert(diags.end(), facts->diagnostics.begin(), facts->diagnostics.end());
    sort_diagnostics(diags);
    const bool errors = has_errors(diags);
    // ERROR lines are shown even when quiet.
    if (!g.quiet)
        print_diagnostics(diags, g, out);
    else if (errors)
        for (const auto& d : diags)
            if (d.severity == Severity::Error)
                err << d.render() << "\n";
    return errors ? kSemantic : kOk;
}

int cmd_eval(const std::string& rules_path, const std::string& facts_path,
             const std::string& goal_text, const std::string& strategy_text, bool explain_trace,
             const Globals& g, std::ostream& out, std::ostream& err) {
    Strategy strategy;
    try {
        strategy = parse_strategy(strategy_text);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    if (!PropositionId::is_valid(goal_text)) {
        err << "error: invalid goal identifier '" << goal_text << "'\n";
        return kUsage;
    }
    auto rules = load_rules(rules_path, err);
    auto facts = load_facts(facts_path, err);
    auto checked = validate(rules, &facts.facts);
    if (!checked.rule_base) {
        for (const auto& d : checked.diagnostics)
            if (d.severity == Severity::Error)
                err << d.render() << "\n";
        return kSemantic;
    }

    std::optional<Verdict> result;
    try {
        result = evaluate(*checked.rule_base, facts.facts, PropositionId(goal_text), strategy);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kSemantic;
    }
    const Verdict& v = *result;
    if (!g.quiet) {
        if (g.json()) {
            out << explain(v, ExplainFormat::Structured) << "\n";
        } else {
            out << goal_text << ": ";
            if (v.holds)
                out << "HOLDS\n";
            else
                out << "DOES NOT HOLD (" << to_string(v.root.status) << ")\n";
            if (explain_trace)
                out << explain(v, ExplainFormat::Text);
        }
    }
    return v.holds ? kOk : kNotHolds;
}

int cmd_bench(const lab::GenParams& params, std::size_t trials, unsigned threads,
              const std::string& out_path, const Globals& g, std::ostream& out,
              std::ostream& err) {
    if (trials == 0) {
        err << "error: --trials must be at least 1\n";
        return kUsage;
    }
    lab::DiffReport report;
    try {
        report = lab::bench(params, trials, threads);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    write_output(out_path, lab::to_csv(report), out, err);

    // Keep stdout pure CSV when no file was given.
    std::ostream& summary = out_path.empty() ? err : out;
    if (!g.quiet) {
        summary << "trials: " << report.trials << ", mismatches: " << report.mismatches.size()
                << "\n";
        for (std::size_t i = 0; i < lab::all_strategies.size(); ++i) {
            const auto& c = report.stats_by_strategy[i];
            summary << "  " << to_string(lab::all_strategies[i])
                    << " propositions_evaluated mean=" << c.mean << " min=" << c.min
                    << " max=" << c.max << "\n";
        }
    }
    for (const auto& m : report.mismatches)
        err << "MISMATCH seed=" << m.seed << " goal=" << m.goal << "\n";
    return report.passed() ? kOk : kSemantic;
}

int cmd_export(const std::string& rules_path, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
    auto checked = validate(load_rules(rules_path, err));
    if (!checked.rule_base) {
        for (const auto& d : checked.diagnostics)
            if (d.severity == Severity::Error)
                err << d.render() << "\n";
        return kSemantic;
    }
    write_output(out_path, proleg::export_proleg(*checked.rule_base), out, err);
    return kOk;
}

int cmd_import(const std::string& clause_path, const std::string& out_path, std::ostream& out,
               std::ostream& err) {
    auto text = load(clause_path, err);
    proleg::Imported imported;
    try {
        imported = proleg::import_proleg(text);
    } catch (const Error& e) {
        err << "ERROR " << e.what() << "\n";
        return e.code() == ErrorCode::SyntaxError ? kUsage : kSemantic;
    }
    write_output(out_path, serialize_rule_base(imported.rule_base), out, err);
    return kOk;
}

std::atomic<http::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_server.load())
        s->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& rules_dir, const Globals& g,
              std::ostream& out, std::ostream& err) {
    http::Service service;
    if (!rules_dir.empty()) {
        try {
            auto n = service.preload(rules_dir, err);
            if (!g.quiet)
                out << "loaded " << n << " rule base(s) from " << rules_dir << "\n";
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kUsage;
        }
    }
    http::Server server(service);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        err << "error: cannot listen on " << host << ":" << port << "\n";
        return kUsage;
    }
    if (!g.quiet)
        out << "listening on http://" << host << ":" << bound << std::endl;
    g_server = &server;
    auto prev_int = std::signal(SIGINT, on_signal);
    auto prev_term = std::signal(SIGTERM, on_signal);
    server.run();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    g_server = nullptr;
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Defeasible rule evaluation, strategy benchmarking and PROLEG clause export",
                 "lexrule"};
    app.require_subcommand(1);
    Globals g;
    app.add_flag("-q,--quiet", g.quiet, "Print nothing but errors");
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}));

    std::string rules_path, facts_path, goal, strategy = "EXCEPTION_FIRST", out_path, in_path;
    bool explain_trace = false;

    auto* validate_cmd = app.add_subcommand("validate", "Check a rule file (and optional facts)");
    validate_cmd->add_option("rules", rules_path, "Rule file")->required();
    validate_cmd->add_option("facts", facts_path, "Fact file");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a goal; exit 0 holds, 3 does not");
    eval_cmd->add_option("rules", rules_path, "Rule file")->required();
    eval_cmd->add_option("facts", facts_path, "Fact file")->required();
    eval_cmd->add_option("goal", goal, "Goal proposition")->required();
    eval_cmd->add_option("-s,--strategy", strategy,
                         "EXCEPTION_FIRST | CONDITIONS_FIRST | RACING");
    eval_cmd->add_flag("-e,--explain", explain_trace, "Print the proof tree");

    lab::GenParams params;
    std::size_t trials = 100;
    unsigned threads = 1;
    auto* bench_cmd = app.add_subcommand("bench", "Differential strategy run on generated rule bases");
    bench_cmd->add_option("--rules", params.n_rules, "Rules per rule base");
    bench_cmd->add_option("--max-conditions", params.max_conditions);
    bench_cmd->add_option("--max-exceptions", params.max_exceptions);
    bench_cmd->add_option("--max-depth", params.max_depth);
    bench_cmd->add_option("--leaves", params.n_leaves, "Fact-only propositions per rule base");
    bench_cmd->add_option("--p-any", params.p_any, "Probability a rule uses ANY");
    bench_cmd->add_option("--p-fact", params.p_fact, "Probability a leaf is asserted");
    bench_cmd->add_option("--seed", params.seed);
    bench_cmd->add_option("--trials", trials);
    bench_cmd->add_option("--threads", threads)->check(CLI::PositiveNumber);
    bench_cmd->add_option("-o,--out", out_path, "CSV destination (default stdout)");

    auto* export_cmd = app.add_subcommand("export-proleg", "Rule file to clause text");
    export_cmd->add_option("rules", rules_path, "Rule file")->required();
    export_cmd->add_option("-o,--out", out_path, "Destination (default stdout)");

    auto* import_cmd = app.add_subcommand("import-proleg", "Clause text to rule file");
    import_cmd->add_option("clauses", in_path, "Clause file")->required();
    import_cmd->add_option("-o,--out", out_path, "Destination (default stdout)");

    std::string host = "127.0.0.1", rules_dir;
    int port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", host);
    serve_cmd->add_option("--rules-dir", rules_dir, "Preload *.json rule files")
        ->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kUsage;
    }

    try {
        if (*validate_cmd)
            return cmd_validate(rules_path, facts_path, g, out, err);
        if (*eval_cmd)
            return cmd_eval(rules_path, facts_path, goal, strategy, explain_trace, g, out, err);
        if (*bench_cmd)
            return cmd_bench(params, trials, threads, out_path, g, out, err);
        if (*export_cmd)
            return cmd_export(rules_path, out_path, out, err);
        if (*import_cmd)
            return cmd_import(in_path, out_path, out, err);
        if (*serve_cmd)
            return cmd_serve(host, port, rules_dir, g, out, err);
    } catch (const Abort& a) {
        return a.code;
    }
    return kUsage;
}

}  // namespace lexrule::cli
