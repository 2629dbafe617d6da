// overlay-phase: command-line front end. Every subcommand writes its artifacts
// and <command>_report.json into --out-dir and prints the report path.

#include <iostream>

#include <CLI11.hpp>

#include "overlay_phase/commands.hpp"

namespace cmd = overlay_phase::commands;
using overlay_phase::Error;

namespace {

void add_common(CLI::App* app, cmd::Common& common) {
    app->add_option("--seed", common.seed, "Random seed");
    app->add_option("--profile", common.profile,
                    "Built-in profile name, profile file, or name under $OVERLAY_PHASE_PROFILE_DIR")
        ->capture_default_str();
    app->add_option("--out-dir", common.out_dir, "Directory for artifacts")->capture_default_str();
}

struct InputFlags {
    std::string format;
    std::string software;
    std::string mode;
};

void add_input(CLI::App* app, cmd::InputOptions& in, InputFlags& flags) {
    app->add_option("input", in.path, "Crawl trace (.jsonl, .csv, optionally .gz)")->required();
    app->add_option("--format", flags.format, "jsonl or csv (default: by extension)");
    app->add_flag("--lenient", in.lenient, "Skip malformed lines instead of failing");
    app->add_option("--software", flags.software, "Keep records of this software tag");
    app->add_option("--mode", flags.mode, "Keep records in this mode (leaf, ultra, unknown)");
    app->add_option("--min-records", in.filter.min_records, "Drop traces with fewer records");
}

void resolve_input(cmd::InputOptions& in, const InputFlags& flags) {
    if (!flags.format.empty()) in.format = overlay_phase::parse_format(flags.format);
    if (!flags.software.empty()) in.filter.software = flags.software;
    if (!flags.mode.empty()) in.filter.mode = overlay_phase::parse_mode(flags.mode);
}

void add_model(CLI::App* app, cmd::ModelOptions& m) {
    app->add_option("--lambda-l", m.lambda_l, "Leaf-slot arrivals per interval");
    app->add_option("--mu-l", m.mu_l, "Leaf-slot drop rate per connection per interval");
    app->add_option("--lambda-u", m.lambda_u, "Ultra-slot arrivals per interval");
    app->add_option("--mu-u", m.mu_u, "Ultra-slot drop rate per connection per interval");
    app->add_option("--B-l", m.leaf_max, "Leaf slot cap");
    app->add_option("--B-u", m.ultra_max, "Ultra slot cap");
    app->add_option("--L-u", m.ultra_active, "Active-connect threshold");
    app->add_option("--dt", m.dt, "BDTM time step, in crawl intervals")->capture_default_str();
    app->add_flag("--literal", m.literal, "Use the figure-caption parameter reading");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space analysis and modelling of two-tier overlay degree dynamics"};
    app.set_version_flag("--version", std::string(cmd::version()));
    app.require_subcommand(1);

    cmd::AnalyzeOptions analyze;
    InputFlags analyze_flags;
    auto* a = app.add_subcommand("analyze", "Intensity, stream fields, region matrix G, p and h");
    add_common(a, analyze.common);
    add_input(a, analyze.input, analyze_flags);
    a->add_option("--group", analyze.group, "Cell size of the field outputs")->capture_default_str();
    a->add_option("--min-support", analyze.min_support, "Minimum pairs per stream cell")
        ->capture_default_str();

    cmd::ClassifyOptions classify;
    InputFlags classify_flags;
    auto* c = app.add_subcommand("classify", "Per-trace attributes and class");
    add_common(c, classify.common);
    add_input(c, classify.input, classify_flags);

    cmd::FitOptions fit;
    InputFlags fit_flags;
    auto* f = app.add_subcommand("fit", "Departure histograms, rate and lifetime estimates");
    add_common(f, fit.common);
    add_input(f, fit.input, fit_flags);
    f->add_option("--break-time", fit.break_time, "Session break in seconds")->capture_default_str();
    f->add_option("--min-leaf", fit.min_leaf, "Ultra-mode filter: minimum d_l")->capture_default_str();
    f->add_option("--min-ultra", fit.min_ultra, "Ultra-mode filter: minimum d_u")->capture_default_str();
    f->add_option("--head-k", fit.head_k, "Counts used by the head-k Poisson fit")->capture_default_str();

    cmd::ModelOptions model;
    auto* m = app.add_subcommand("model", "CTDM and BDTM equilibria, blocking, admitted rates");
    add_common(m, model.common);
    add_model(m, model);

    cmd::GenerateOptions generate;
    auto* g = app.add_subcommand("generate", "Synthetic traces from the CTDM or BDTM generator");
    add_common(g, generate.model.common);
    add_model(g, generate.model);
    g->add_option("--model", generate.kind, "ctdm or bdtm")->capture_default_str();
    g->add_option("--traces", generate.traces, "Number of traces")->capture_default_str();
    g->add_option("--steps", generate.steps, "Steps per trace")->capture_default_str();
    g->add_option("--x0-leaf", generate.x0_leaf, "Initial leaf degree");
    g->add_option("--x0-ultra", generate.x0_ultra, "Initial ultra degree");
    g->add_option("--out", generate.out, "Output trace file");
    g->add_option("--threads", generate.threads, "Worker threads")->capture_default_str();

    cmd::SimulateOptions simulate;
    auto* s = app.add_subcommand("simulate", "Slot-protocol overlay simulation with crawling");
    add_common(s, simulate.common);
    s->add_option("--config", simulate.config, "Simulator TOML config");
    s->add_option("--out", simulate.out, "Output trace file");
    s->add_option("--peers", simulate.peers, "Crawled peers");
    s->add_option("--hours", simulate.hours, "Crawl window in hours");
    s->add_option("--attempt-scale", simulate.attempt_scale, "Multiplier on proposal rates");
    s->add_flag("--check-invariants", simulate.check_invariants, "Verify the overlay at every crawl");

    cmd::ReportOptions report;
    InputFlags report_flags;
    auto* r = app.add_subcommand("report", "analyze, classify and fit in one report");
    add_common(r, report.common);
    add_input(r, report.input, report_flags);
    r->add_option("--group", report.group, "Cell size of the field outputs")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cmd::Result result;
        if (*a) {
            resolve_input(analyze.input, analyze_flags);
            result = cmd::cmd_analyze(analyze);
        } else if (*c) {
            resolve_input(classify.input, classify_flags);
            result = cmd::cmd_classify(classify);
        } else if (*f) {
            resolve_input(fit.input, fit_flags);
            result = cmd::cmd_fit(fit);
        } else if (*m) {
            result = cmd::cmd_model(model);
        } else if (*g) {
            result = cmd::cmd_generate(generate);
        } else if (*s) {
            result = cmd::cmd_simulate(simulate);
        } else if (*r) {
            resolve_input(report.input, report_flags);
            result = cmd::cmd_report(report);
        }
        std::cout << result.report_path.string() << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "overlay-phase: " << e.what() << "\n";
        return cmd::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "overlay-phase: internal error: " << e.what() << "\n";
        return 4;
    }
}
