#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "overlay_phase/core.hpp"
#include "overlay_phase/ingest.hpp"

// Subcommand implementations behind the overlay-phase executable. Each one
// writes CSV artifacts plus <command>_report.json into out_dir and returns the
// report text. Errors surface as overlay_phase::Error.
namespace overlay_phase::commands {

struct Common {
    std::optional<std::uint64_t> seed;  // 1 when unset, except where a config file names one
    std::string profile = "limewire";
    std::filesystem::path out_dir = ".";
};

struct InputOptions {
    std::filesystem::path path;
    std::optional<TraceFormat> format;  // from the extension when unset
    bool lenient = false;               // keep going past malformed lines
    TraceFilter filter;
};

struct AnalyzeOptions {
    Common common;
    InputOptions input;
    int group = 2;                 // cell size of the stream and arrow fields
    std::int64_t min_support = 1;  // stream cells with fewer pairs are dropped
};

struct ClassifyOptions {
    Common common;
    InputOptions input;
};

struct FitOptions {
    Common common;
    InputOptions input;
    std::int64_t break_time = 7200;  // seconds
    int min_leaf = 10;               // ultra-mode filter on the earlier state
    int min_ultra = 10;
    int head_k = 11;
};

struct ModelOptions {
    Common common;
    std::optional<double> lambda_l, mu_l, lambda_u, mu_u;  // per crawl interval
    std::optional<int> leaf_max, ultra_max, ultra_active;  // B_l, B_u, L_u
    double dt = 1.0;       // BDTM time step in crawl intervals
    bool literal = false;  // the figure-caption parameter reading
};

struct GenerateOptions {
    ModelOptions model;
    std::string kind = "ctdm";
    std::size_t traces = 10;
    std::int64_t steps = 46;
    std::optional<int> x0_leaf, x0_ultra;
    std::optional<std::filesystem::path> out;  // default out_dir/generated.jsonl
    unsigned threads = 1;
};

struct SimulateOptions {
    Common common;
    std::optional<std::filesystem::path> config;  // TOML
    std::optional<std::filesystem::path> out;     // default out_dir/trace.jsonl.gz
    std::optional<std::size_t> peers;
    std::optional<double> hours;
    std::optional<double> attempt_scale;
    bool check_invariants = false;
};

struct ReportOptions {
    Common common;
    InputOptions input;
    int group = 2;
};

struct Result {
    std::string report;  // JSON, keys sorted
    std::filesystem::path report_path;
    std::vector<std::filesystem::path> artifacts;
};

Result cmd_analyze(const AnalyzeOptions& options);
Result cmd_classify(const ClassifyOptions& options);
Result cmd_fit(const FitOptions& options);
Result cmd_model(const ModelOptions& options);
Result cmd_generate(const GenerateOptions& options);
Result cmd_simulate(const SimulateOptions& options);
Result cmd_report(const ReportOptions& options);

int exit_code(ErrorKind kind);
std::string sha256_hex(std::string_view data);
std::string_view version();

}  // namespace overlay_phase::commands
