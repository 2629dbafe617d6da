#include "overlay_phase/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "overlay_phase/analytics.hpp"
#include "overlay_phase/churn.hpp"
#include "overlay_phase/classifier.hpp"
#include "overlay_phase/markov.hpp"
#include "overlay_phase/profiles.hpp"
#include "overlay_phase/queue.hpp"
#include "overlay_phase/simulator.hpp"
#include "overlay_phase/tracegen.hpp"

#ifndef OVERLAY_PHASE_VERSION
#define OVERLAY_PHASE_VERSION "0.0.0"
#endif

namespace overlay_phase::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double x) {
    if (!std::isfinite(x)) return "nan";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
public:
    explicit Csv(std::string_view header) { text_.append(header).push_back('\n'); }
    template <typename... Ts>
    void row(const Ts&... cells) {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
        text_.push_back('\n');
    }
    const std::string& text() const { return text_; }

private:
    static std::string cell(double x) { return num(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(long x) { return std::to_string(x); }
    static std::string cell(long long x) { return std::to_string(x); }
    static std::string cell(unsigned long x) { return std::to_string(x); }
    static std::string cell(unsigned long long x) { return std::to_string(x); }
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(std::string_view s) { return std::string(s); }
    static std::string cell(const char* s) { return s; }
    std::string text_;
};

/// Collects artifacts and assembles the report of one subcommand.
class Run {
public:
    Run(std::string command, const Common& common) : command_(std::move(command)), common_(common) {
        std::error_code ec;
        fs::create_directories(common.out_dir, ec);
        if (ec) throw input_error("cannot create " + common.out_dir.string() + ": " + ec.message());
        profile_ = resolve_profile(common.profile);
        config_["profile"] = common.profile;
        config_["out_dir"] = common.out_dir.string();
    }

    const SoftwareProfile& profile() const { return profile_; }
    json& config() { return config_; }
    json& results() { return results_; }
    json& input() { return input_; }
    std::uint64_t seed(std::uint64_t fallback = 1) const { return common_.seed.value_or(fallback); }

    void write(const std::string& name, const std::string& text) {
        const fs::path path = common_.out_dir / name;
        write_text_file(path, text);
        artifacts_.push_back(path);
    }
    void add_artifact(const fs::path& path) { artifacts_.push_back(path); }

    Result finish(std::uint64_t seed) {
        json report;
        report["command"] = command_;
        report["config"] = config_;
        if (!input_.is_null()) report["input"] = input_;
        report["results"] = results_;
        report["seed"] = seed;
        report["version"] = OVERLAY_PHASE_VERSION;
        json names = json::array();
        for (const auto& a : artifacts_) names.push_back(a.filename().string());
        report["artifacts"] = names;
        Result result;
        result.report = report.dump(2) + "\n";
        result.report_path = common_.out_dir / (command_ + "_report.json");
        write_text_file(result.report_path, result.report);
        result.artifacts = artifacts_;
        return result;
    }

private:
    std::string command_;
    Common common_;
    SoftwareProfile profile_;
    json config_ = json::object();
    json results_ = json::object();
    json input_;
    std::vector<fs::path> artifacts_;
};

json filter_json(const TraceFilter& f) {
    json j = json::object();
    j["software"] = f.software ? json(*f.software) : json(nullptr);
    j["mode"] = f.mode ? json(std::string(to_string(*f.mode))) : json(nullptr);
    j["min_records"] = f.min_records;
    return j;
}

TraceStore load_input(const InputOptions& in, Run& run) {
    const TraceFormat format = in.format ? *in.format : format_for(in.path);
    const std::string text = read_text_file(in.path);
    auto parsed = parse_crawl_text(text, format);
    json& j = run.input();
    j["path"] = in.path.string();
    j["format"] = format == TraceFormat::Jsonl ? "jsonl" : "csv";
    j["digest"] = "sha256:" + sha256_hex(text);
    j["diagnostics"] = parsed.diagnostics.size();
    run.config()["input"] = in.path.string();
    run.config()["lenient"] = in.lenient;
    run.config()["filter"] = filter_json(in.filter);
    if (!parsed.diagnostics.empty()) {
        Csv csv("line,reason");
        for (const auto& d : parsed.diagnostics) csv.row(d.line, d.reason);
        run.write("diagnostics.csv", csv.text());
        if (!in.lenient) {
            std::ostringstream msg;
            msg << in.path.string() << ": " << parsed.diagnostics.size() << " malformed line(s)";
            const auto shown = std::min<std::size_t>(parsed.diagnostics.size(), 5);
            for (std::size_t i = 0; i < shown; ++i) {
                msg << "\n  line " << parsed.diagnostics[i].line << ": "
                    << parsed.diagnostics[i].reason;
            }
            throw input_error(msg.str());
        }
    }
    TraceStore store = filter(parsed.store, in.filter);
    j["records"] = store.record_count();
    j["peers"] = store.peer_count();
    if (store.empty()) throw empty_input_error(in.path.string() + ": no records to analyze");
    return store;
}

std::vector<std::string> region_names() {
    std::vector<std::string> names;
    for (auto id : kRegions) names.emplace_back(to_string(id));
    return names;
}

// ---------------------------------------------------------------- analyze

json analyze_store(const TraceStore& store, const SoftwareProfile& profile, int group,
                   std::int64_t min_support, Run& run) {
    namespace an = overlay_phase::analytics;
    json out;

    const auto grid = an::intensity(store);
    {
        Csv csv("d_l,d_u,count,value");
        std::int64_t best = 0;
        PhaseState best_state;
        int cells = 0;
        for (int l = 0; l <= grid.max_leaf(); ++l) {
            for (int u = 0; u <= grid.max_ultra(); ++u) {
                const PhaseState s(l, u);
                const auto c = grid.at(s);
                if (c == 0) continue;
                ++cells;
                if (c > best) {
                    best = c;
                    best_state = s;
                }
                csv.row(l, u, c, grid.value(s, an::GridTransform::FourthRoot));
            }
        }
        run.write("intensity.csv", csv.text());
        out["intensity"] = {{"total", grid.total()},
                            {"cells", cells},
                            {"peak", {{"d_l", best_state.leaf}, {"d_u", best_state.ultra},
                                      {"count", best}}}};
    }

    const auto pairs = an::transition_pairs(store);
    out["pairs"] = pairs.size();

    {
        const auto field = an::stream_field(pairs, group, min_support);
        Csv csv("d_l,d_u,value,vx,vy,support");
        for (const auto& [cell, v] : field) {
            csv.row(cell.leaf * group, cell.ultra * group, std::hypot(v.dx, v.dy), v.dx, v.dy,
                    v.support);
        }
        run.write("stream_field.csv", csv.text());
        out["stream_field"] = {{"cells", field.size()}, {"group", group},
                               {"min_support", min_support}};
    }

    auto arrows = [&](const an::ArrowField& field, const std::string& name) {
        Csv csv("d_l,d_u,vx,vy,length");
        std::size_t n = 0;
        for (const auto& [cell, list] : field) {
            for (const auto& a : list) {
                csv.row(cell.leaf * group, cell.ultra * group, a.dx, a.dy, a.length);
                ++n;
            }
        }
        run.write(name, csv.text());
        return n;
    };
    out["arrows"] = {{"outgoing", arrows(an::outgoing_field(pairs, group), "outgoing_field.csv")},
                     {"incoming", arrows(an::incoming_field(pairs, group), "incoming_field.csv")}};

    {
        const auto sp = an::stationary_probability(pairs);
        Csv csv("d_l,d_u,value");
        for (const auto& [s, v] : sp) csv.row(s.leaf, s.ultra, v);
        run.write("stationary.csv", csv.text());
        out["stationary_cells"] = sp.size();
    }

    json regions;
    regions["order"] = region_names();
    try {
        const auto rt = an::region_transfer_matrix(pairs, profile);
        json g = json::array();
        Csv gcsv("to,LSR,USR,TB,UDR");
        for (int i = 0; i < 4; ++i) {
            json row = json::array();
            for (int j = 0; j < 4; ++j) row.push_back(rt.g(i, j));
            g.push_back(row);
            gcsv.row(std::string(to_string(kRegions[i])), rt.g(i, 0), rt.g(i, 1), rt.g(i, 2),
                     rt.g(i, 3));
        }
        run.write("region_matrix.csv", gcsv.text());
        regions["G"] = g;
        regions["p"] = std::vector<double>(rt.p.data(), rt.p.data() + 4);
        regions["outgoing"] = rt.outgoing;
        regions["excluded_pairs"] = rt.excluded_pairs;
        json empty = json::array();
        for (auto id : rt.empty_columns) empty.push_back(std::string(to_string(id)));
        regions["empty_columns"] = empty;
        Csv dcsv("region,p,h");
        try {
            const auto h = an::equilibrium(rt.g);
            regions["h"] = std::vector<double>(h.data(), h.data() + 4);
            for (int i = 0; i < 4; ++i) {
                dcsv.row(std::string(to_string(kRegions[i])), rt.p(i), h(i));
            }
        } catch (const Error& e) {
            // A reducible chain (e.g. regions never visited) has no unique h.
            regions["h"] = nullptr;
            regions["h_error"] = e.what();
            for (int i = 0; i < 4; ++i) {
                dcsv.row(std::string(to_string(kRegions[i])), rt.p(i), "");
            }
        }
        run.write("region_distribution.csv", dcsv.text());
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Input) throw;
        regions["G"] = nullptr;
        regions["error"] = e.what();
    }
    out["regions"] = regions;
    return out;
}

// ---------------------------------------------------------------- classify

json classify_store(const TraceStore& store, const SoftwareProfile& profile, Run& run) {
    namespace cl = overlay_phase::classifier;
    const auto regions = cl::regions_from(profile);
    std::map<std::string, std::int64_t> histogram;
    for (auto c : cl::kClasses) histogram[std::string(cl::to_string(c))] = 0;
    Csv csv("peer,records,eta_l,eta_t,eta_u,xi_l,xi_t,xi_u,class,subplot");
    for (const auto& [peer, trace] : store.traces()) {
        const auto states = trace.states();
        const auto a = cl::trace_attributes(states, regions);
        const auto c = cl::classify(a);
        ++histogram[std::string(cl::to_string(c))];
        csv.row(peer, trace.size(), a.eta_l, a.eta_t, a.eta_u, a.xi_l, a.xi_t, a.xi_u,
                cl::to_string(c), cl::subplot_of(c));
    }
    run.write("classes.csv", csv.text());
    json out;
    out["traces"] = store.peer_count();
    out["classes"] = histogram;
    out["regions"] = {{"usp", {regions.usp.leaf, regions.usp.ultra}},
                      {"lsp", {regions.lsp.leaf, regions.lsp.ultra}},
                      {"r_u", regions.r_u},
                      {"r_l", regions.r_l}};
    return out;
}

// ---------------------------------------------------------------- fit

/// Most frequent gap between consecutive responses, in seconds.
std::int64_t crawl_interval_of(const TraceStore& store) {
    std::map<std::int64_t, std::int64_t> gaps;
    for (const auto& [peer, trace] : store.traces()) {
        const auto& r = trace.records();
        for (std::size_t i = 1; i < r.size(); ++i) ++gaps[r[i].t() - r[i - 1].t()];
    }
    if (gaps.empty()) return 1800;
    return std::max_element(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
               return a.second < b.second;
           })->first;
}

json side_fit(std::span<const churn::ChurnStep> all, churn::Side side,
              const churn::ModeFilter& mode_filter, int cap, int head_k, double interval_hours,
              Csv& hist_csv) {
    const bool leaf = side == churn::Side::Leaf;
    const std::string name = leaf ? "leaf" : "ultra";
    // Steps one crawl interval long with the earlier state in ultra mode.
    std::vector<churn::ChurnStep> steps;
    for (const auto& s : all) {
        if (s.from.leaf < mode_filter.min_leaf || s.from.ultra < mode_filter.min_ultra) continue;
        steps.push_back(s);
    }
    if (steps.empty()) return nullptr;
    const auto hist = churn::departure_histogram(steps, side, churn::ModeFilter::none());
    for (std::size_t k = 0; k < hist.freq.size(); ++k) hist_csv.row(name, k, hist.freq[k]);

    double degree = 0.0, departures = 0.0, arrivals = 0.0, full = 0.0, change = 0.0;
    for (const auto& s : steps) {
        degree += leaf ? s.from.leaf : s.from.ultra;
        departures += leaf ? s.leaf_departures : s.ultra_departures;
        arrivals += leaf ? s.leaf_arrivals : s.ultra_arrivals;
        full += (leaf ? s.from.leaf : s.from.ultra) >= cap ? 1.0 : 0.0;
        change += s.degree_change;
    }
    const double n = static_cast<double>(steps.size());
    degree /= n;
    departures /= n;
    arrivals /= n;
    const double q = full / n;

    json j;
    j["steps"] = steps.size();
    j["mean_degree"] = degree;
    j["mean_departures"] = departures;
    j["mean_arrivals"] = arrivals;
    j["mean_degree_change"] = change / n;
    j["blocking"] = q;
    j["poisson_mean_minus_one"] =
        churn::fit_poisson(hist, churn::PoissonMethod::MeanMinusOne).lambda_hat;
    try {
        j["poisson_head_k"] = churn::fit_poisson(hist, churn::PoissonMethod::HeadKMean, head_k).lambda_hat;
    } catch (const Error&) {
        j["poisson_head_k"] = nullptr;
    }
    if (degree > 0.0) {
        const double fraction = departures / degree;
        j["mu_hat_raw"] = queue::calibrate_mu(departures, degree);
        if (fraction < 1.0) {
            const double hazard = churn::drop_hazard(fraction);
            const double admitted = churn::admitted_from_visible(arrivals, hazard);
            j["mu_hat"] = hazard;
            j["admitted"] = admitted;
            j["lambda_hat"] = q < 1.0 ? json(queue::estimate_lambda(q, admitted)) : json(nullptr);
            j["lambda_hat_raw"] = q < 1.0 ? json(queue::estimate_lambda(q, arrivals)) : json(nullptr);
        }
        if (departures > 0.0) {
            j["connection_lifetime_hours"] =
                churn::connection_lifetime(degree, departures / interval_hours);
        }
    }
    return j;
}

json fit_store(const TraceStore& store, const SoftwareProfile& profile, const FitOptions& o,
               Run& run) {
    const std::int64_t interval = crawl_interval_of(store);
    const double interval_hours = static_cast<double>(interval) / 3600.0;
    // Only consecutive responses one interval apart form a churn step.
    std::vector<churn::ChurnStep> steps;
    for (const auto& [peer, trace] : store.traces()) {
        const auto& r = trace.records();
        for (auto& s : churn::churn_steps(trace)) {
            if (r[s.interval + 1].t() - r[s.interval].t() == interval) steps.push_back(std::move(s));
        }
    }
    json out;
    out["interval_seconds"] = interval;
    out["steps"] = steps.size();
    const churn::ModeFilter mode_filter{o.min_leaf, o.min_ultra};
    Csv hist_csv("side,k,freq");
    out["leaf_side"] = side_fit(steps, churn::Side::Leaf, mode_filter, profile.limits.leaf_max,
                                o.head_k, interval_hours, hist_csv);
    out["ultra_side"] = side_fit(steps, churn::Side::Ultra, mode_filter,
                                 profile.limits.ultra_max, o.head_k, interval_hours, hist_csv);
    run.write("departure_histograms.csv", hist_csv.text());

    std::vector<churn::ChurnStep> filtered;
    for (const auto& s : steps) {
        if (s.from.leaf >= o.min_leaf && s.from.ultra >= o.min_ultra) filtered.push_back(s);
    }
    try {
        out["departure_correlation"] = churn::departure_correlation(filtered);
    } catch (const Error&) {
        out["departure_correlation"] = nullptr;
    }

    // Sessions, labelled by the majority mode of their responses.
    std::vector<churn::Session> all, by_mode[2];
    Csv scsv("peer,start,end,duration_hours,mode");
    for (const auto& [peer, trace] : store.traces()) {
        for (const auto& s : churn::sessions(trace, o.break_time)) {
            int ultra = 0, total = 0;
            for (const auto& r : trace.records()) {
                if (r.t() < s.start || r.t() > s.end) continue;
                ++total;
                if (r.mode() == PeerMode::Ultra) ++ultra;
            }
            const bool is_ultra = 2 * ultra > total;
            all.push_back(s);
            by_mode[is_ultra ? 1 : 0].push_back(s);
            scsv.row(peer, s.start, s.end, static_cast<double>(s.duration()) / 3600.0,
                     is_ultra ? "ultra" : "leaf");
        }
    }
    run.write("sessions.csv", scsv.text());
    const auto last = store.time_range()->second;
    auto exp_fit = [&](const std::vector<churn::Session>& list) -> json {
        try {
            const auto f = churn::fit_exponential(list, last);
            return {{"n", f.n}, {"mean_hours", f.mean_hours()}, {"rate_per_hour", f.rate_per_hour()}};
        } catch (const Error&) {
            return nullptr;
        }
    };
    out["sessions"] = {{"count", all.size()},
                       {"break_time", o.break_time},
                       {"censor_after", last},
                       {"all", exp_fit(all)},
                       {"leaf", exp_fit(by_mode[0])},
                       {"ultra", exp_fit(by_mode[1])}};
    return out;
}

// ---------------------------------------------------------------- model

queue::DoubleModel resolve_model(const ModelOptions& o, const SoftwareProfile& profile) {
    QueueLimits limits = profile.limits;
    if (o.leaf_max) limits.leaf_max = *o.leaf_max;
    if (o.ultra_max) limits.ultra_max = *o.ultra_max;
    if (o.ultra_active) limits.ultra_active = *o.ultra_active;
    try {
        limits.validate();
    } catch (const Error& e) {
        throw model_error(std::string("model limits: ") + e.what());
    }
    const auto base = o.literal ? queue::DoubleModel::limewire_literal()
                                : queue::DoubleModel::limewire();
    queue::DoubleModel m;
    m.leaf = queue::QueueParams::leaf(o.lambda_l.value_or(base.leaf.lambda),
                                      o.mu_l.value_or(base.leaf.mu), limits);
    m.ultra = queue::QueueParams::ultra(o.lambda_u.value_or(base.ultra.lambda),
                                        o.mu_u.value_or(base.ultra.mu), limits);
    m.leaf.validate();
    m.ultra.validate();
    return m;
}

json model_json(const queue::DoubleModel& m, const ModelOptions& o) {
    auto params = [](const queue::QueueParams& p) {
        return json{{"lambda", p.lambda}, {"mu", p.mu}, {"m", p.m}, {"k", p.k}};
    };
    return {{"leaf", params(m.leaf)}, {"ultra", params(m.ultra)}, {"dt", o.dt},
            {"literal", o.literal}};
}

json one_queue(const queue::QueueParams& p, double dt, const std::string& name, Run& run) {
    const auto ctdm = queue::ctdm_equilibrium(p);
    const auto scaled = p.scaled(dt);
    scaled.validate(true);
    const auto bdtm = queue::bdtm_equilibrium(queue::bdtm_transfer(scaled), p.floor());
    Csv csv("degree,ctdm,bdtm");
    for (int d = p.floor(); d <= p.cap(); ++d) csv.row(d, ctdm.at_degree(d), bdtm.at_degree(d));
    run.write("equilibrium_" + name + ".csv", csv.text());
    const double loss = queue::blocking_probability(p);
    const auto split = queue::admitted_rejected(p.lambda, loss);
    json j;
    j["blocking"] = loss;
    j["admitted"] = split.admitted;
    j["rejected"] = split.rejected;
    j["mean_degree_ctdm"] = ctdm.mean_degree();
    j["mean_degree_bdtm"] = bdtm.mean_degree();
    j["tv_bdtm_ctdm"] = markov::total_variation(ctdm.vector(), bdtm.vector());
    j["ctdm_mass"] = ctdm.vector().sum();
    j["bdtm_mass"] = bdtm.vector().sum();
    return j;
}

}  // namespace

// ---------------------------------------------------------------- entry points

Result cmd_analyze(const AnalyzeOptions& o) {
    Run run("analyze", o.common);
    run.config()["group"] = o.group;
    run.config()["min_support"] = o.min_support;
    const auto store = load_input(o.input, run);
    run.results() = analyze_store(store, run.profile(), o.group, o.min_support, run);
    return run.finish(run.seed());
}

Result cmd_classify(const ClassifyOptions& o) {
    Run run("classify", o.common);
    const auto store = load_input(o.input, run);
    run.results() = classify_store(store, run.profile(), run);
    return run.finish(run.seed());
}

Result cmd_fit(const FitOptions& o) {
    Run run("fit", o.common);
    run.config()["break_time"] = o.break_time;
    run.config()["min_leaf"] = o.min_leaf;
    run.config()["min_ultra"] = o.min_ultra;
    run.config()["head_k"] = o.head_k;
    const auto store = load_input(o.input, run);
    run.results() = fit_store(store, run.profile(), o, run);
    return run.finish(run.seed());
}

Result cmd_model(const ModelOptions& o) {
    Run run("model", o.common);
    const auto m = resolve_model(o, run.profile());
    run.config()["model"] = model_json(m, o);
    json r;
    r["leaf"] = one_queue(m.leaf, o.dt, "leaf", run);
    r["ultra"] = one_queue(m.ultra, o.dt, "ultra", run);
    run.results() = r;
    return run.finish(run.seed());
}

Result cmd_generate(const GenerateOptions& o) {
    Run run("generate", o.model.common);
    const auto m = resolve_model(o.model, run.profile());
    tracegen::GenConfig g;
    g.model = tracegen::parse_model(o.kind);
    g.leaf = m.leaf;
    g.ultra = m.ultra;
    if (g.model == tracegen::Model::Bdtm) {
        g.leaf = g.leaf.scaled(o.model.dt);
        g.ultra = g.ultra.scaled(o.model.dt);
    }
    const auto usp = run.profile().ultra_stable_point;
    g.x0 = PhaseState(std::clamp(o.x0_leaf.value_or(usp.leaf), m.leaf.floor(), m.leaf.cap()),
                      std::clamp(o.x0_ultra.value_or(usp.ultra), m.ultra.floor(), m.ultra.cap()));
    g.steps = o.steps;
    g.seed = run.seed();
    g.interval_seconds = 1800;
    g.validate();
    if (o.traces == 0) throw input_error("generate: need at least one trace");

    const fs::path out = o.out ? *o.out : o.model.common.out_dir / "generated.jsonl";
    run.config()["model"] = model_json(m, o.model);
    run.config()["kind"] = o.kind;
    run.config()["traces"] = o.traces;
    run.config()["steps"] = o.steps;
    run.config()["x0"] = {g.x0.leaf, g.x0.ultra};
    run.config()["out"] = out.string();
    run.config()["threads"] = o.threads;

    const auto traces = tracegen::generate_many(g, o.traces, o.threads);
    std::vector<CrawlRecord> records;
    const std::string width = std::to_string(o.traces - 1);
    double leaf_sum = 0.0, ultra_sum = 0.0;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        std::string digits = std::to_string(t);
        const std::string id = "g" + std::string(width.size() - digits.size(), '0') + digits;
        Rng ids(g.seed, 3 * t + 2);
        auto recs = tracegen::to_records(traces[t], id, run.profile().name, ids);
        for (const auto& s : traces[t]) {
            leaf_sum += s.state.leaf;
            ultra_sum += s.state.ultra;
        }
        std::move(recs.begin(), recs.end(), std::back_inserter(records));
    }
    std::ostringstream text;
    const auto format = format_for(out);
    write_records(text, records, format);
    write_text_file(out, text.str());
    run.add_artifact(out);
    const double n = static_cast<double>(records.size());
    run.results() = {{"records", records.size()},
                     {"mean_leaf_degree", leaf_sum / n},
                     {"mean_ultra_degree", ultra_sum / n}};
    return run.finish(g.seed);
}

Result cmd_simulate(const SimulateOptions& o) {
    Run run("simulate", o.common);
    sim::SimConfig c;
    c.ultra_limits = run.profile().limits;
    c.software = run.profile().name;
    if (o.config) {
        c = sim::parse_sim_config(read_text_file(*o.config), c);
        run.config()["config_file"] = o.config->string();
    }
    if (o.common.seed) c.seed = *o.common.seed;
    if (o.peers) c.peers = *o.peers;
    if (o.hours) c.duration_hours = *o.hours;
    if (o.attempt_scale) c.attempt_scale = *o.attempt_scale;
    if (o.check_invariants) c.check_invariants = true;
    c.validate();
    const fs::path out = o.out ? *o.out : o.common.out_dir / "trace.jsonl.gz";

    run.config()["sim"] = {
        {"peers", c.peers},
        {"leaves_per_ultra", c.leaves_per_ultra},
        {"B_l", c.ultra_limits.leaf_max},
        {"B_u", c.ultra_limits.ultra_max},
        {"L_u", c.ultra_limits.ultra_active},
        {"leaf_max_ultra", c.leaf_max_ultra},
        {"leaf_target_ultra", c.leaf_target_ultra},
        {"leaf_connection_hours", c.leaf_connection_hours},
        {"ultra_connection_hours", c.ultra_connection_hours},
        {"peer_churn", c.peer_churn},
        {"ultra_peer_hours", c.ultra_peer_hours},
        {"leaf_peer_hours", c.leaf_peer_hours},
        {"offline_hours", c.offline_hours},
        {"leaf_attempt_rate", c.leaf_attempt_rate},
        {"ultra_attempt_rate", c.ultra_attempt_rate},
        {"attempt_scale", c.attempt_scale},
        {"active_retry_rate", c.active_retry_rate},
        {"promotion_rate", c.policy.promotion_rate},
        {"kickout_rate", c.policy.kickout_rate},
        {"core_threshold", c.policy.core_threshold},
        {"initial_ultra_fraction", c.initial_ultra_fraction},
        {"crawl_interval", c.crawl_interval},
        {"warmup_hours", c.warmup_hours},
        {"duration_hours", c.duration_hours},
        {"software", c.software},
        {"check_invariants", c.check_invariants},
    };
    run.config()["out"] = out.string();

    const auto result = sim::run(c);
    std::ostringstream text;
    write_records(text, result.records, format_for(out));
    write_text_file(out, text.str());
    run.add_artifact(out);

    const auto& s = result.stats;
    const double interval_hours = static_cast<double>(c.crawl_interval) / 3600.0;
    run.results() = {
        {"records", result.records.size()},
        {"ever_ultra", result.ever_ultra},
        {"accepts", s.accepts},
        {"drops", s.drops},
        {"lifetime_drops", s.lifetime_drops},
        {"swap_drops", s.swap_drops},
        {"churn_drops", s.churn_drops},
        {"leaf_slot_attempts", s.leaf_slot_attempts},
        {"leaf_slot_rejects", s.leaf_slot_rejects},
        {"ultra_slot_attempts", s.ultra_slot_attempts},
        {"ultra_slot_rejects", s.ultra_slot_rejects},
        {"promotions", s.promotions},
        {"demotions", s.demotions},
        {"kickouts", s.kickouts},
        {"starvations", s.starvations},
        {"effective_leaf_lambda", finite_or_null(s.effective_leaf_lambda(interval_hours))},
        {"effective_leaf_mu", finite_or_null(s.effective_leaf_mu(interval_hours))},
    };
    return run.finish(c.seed);
}

Result cmd_report(const ReportOptions& o) {
    AnalyzeOptions a{o.common, o.input, o.group, 1};
    ClassifyOptions c{o.common, o.input};
    FitOptions f;
    f.common = o.common;
    f.input = o.input;
    const auto ra = json::parse(cmd_analyze(a).report);
    const auto rc = json::parse(cmd_classify(c).report);
    const auto rf = json::parse(cmd_fit(f).report);
    Run run("report", o.common);
    run.config()["analyze"] = ra["config"];
    run.config()["classify"] = rc["config"];
    run.config()["fit"] = rf["config"];
    run.input() = ra["input"];
    run.results() = {{"analyze", ra["results"]}, {"classify", rc["results"]},
                     {"fit", rf["results"]}};
    for (const auto* r : {&ra, &rc, &rf}) {
        for (const auto& name : (*r)["artifacts"]) {
            run.add_artifact(o.common.out_dir / name.get<std::string>());
        }
    }
    return run.finish(run.seed());
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Input: return 2;
        case ErrorKind::Model: return 3;
        case ErrorKind::Invariant: return 4;
        case ErrorKind::EmptyInput: return 5;
    }
    return 4;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw invariant_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
}

std::string_view version() { return OVERLAY_PHASE_VERSION; }

}  // namespace overlay_phase::commands
