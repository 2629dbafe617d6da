#include "overlay_phase/churn.hpp"

#include <algorithm>
#include <cmath>

namespace overlay_phase::churn {

namespace {

// |a \ b| for sorted, unique id lists.
int set_difference_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    int n = 0;
    auto j = b.begin();
    for (const auto& id : a) {
        while (j != b.end() && *j < id) ++j;
        if (j == b.end() || *j != id) ++n;
    }
    return n;
}

}  // namespace

std::vector<ChurnStep> churn_steps(const PeerTrace& trace) {
    std::vector<ChurnStep> steps;
    const auto& records = trace.records();
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& a = records[i - 1];
        const auto& b = records[i];
        ChurnStep s;
        s.peer_id = trace.peer_id();
        s.interval = i - 1;
        s.from = a.state();
        s.to = b.state();
        s.degree_change = std::hypot(static_cast<double>(s.to.leaf - s.from.leaf),
                                     static_cast<double>(s.to.ultra - s.from.ultra));
        s.leaf_departures = set_difference_size(a.leaf_neighbors(), b.leaf_neighbors());
        s.ultra_departures = set_difference_size(a.ultra_neighbors(), b.ultra_neighbors());
        s.leaf_arrivals = set_difference_size(b.leaf_neighbors(), a.leaf_neighbors());
        s.ultra_arrivals = set_difference_size(b.ultra_neighbors(), a.ultra_neighbors());
        steps.push_back(std::move(s));
    }
    return steps;
}

double Histogram::mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < freq.size(); ++k) m += static_cast<double>(k) * freq[k];
    return m;
}

Histogram histogram_of(std::span<const int> counts) {
    Histogram h;
    for (int c : counts) {
        if (c < 0) throw input_error("negative departure count");
        if (static_cast<std::size_t>(c) >= h.freq.size()) h.freq.resize(c + 1, 0.0);
        h.freq[c] += 1.0;
        ++h.n;
    }
    for (auto& f : h.freq) f /= static_cast<double>(h.n);
    return h;
}

Histogram departure_histogram(std::span<const ChurnStep> steps, Side side,
                              const ModeFilter& filter) {
    std::vector<int> counts;
    for (const auto& s : steps) {
        if (s.from.leaf < filter.min_leaf || s.from.ultra < filter.min_ultra) continue;
        counts.push_back(side == Side::Leaf ? s.leaf_departures : s.ultra_departures);
    }
    return histogram_of(counts);
}

PoissonFit fit_poisson(const Histogram& hist, PoissonMethod method, int k) {
    if (hist.empty()) throw input_error("fit_poisson: empty histogram");
    PoissonFit fit;
    fit.method = method;
    fit.raw_mean = hist.mean();
    if (method == PoissonMethod::MeanMinusOne) {
        fit.lambda_hat = std::max(0.0, fit.raw_mean - 1.0);
        return fit;
    }
    if (k < 1) throw input_error("fit_poisson: k must be positive");
    fit.k = k;
    double mass = 0.0;
    double moment = 0.0;
    for (int c = 0; c < k && c < static_cast<int>(hist.freq.size()); ++c) {
        mass += hist.freq[c];
        moment += c * hist.freq[c];
    }
    if (mass == 0.0) throw input_error("fit_poisson: no mass on the first k counts");
    fit.lambda_hat = moment / mass;
    return fit;
}

std::vector<Session> sessions(const PeerTrace& trace, std::int64_t break_time) {
    if (break_time <= 0) throw input_error("break time must be positive");
    std::vector<Session> out;
    for (const auto& r : trace.records()) {
        if (out.empty() || r.t() - out.back().end > break_time) {
            out.push_back({trace.peer_id(), r.t(), r.t()});
        } else {
            out.back().end = r.t();
        }
    }
    return out;
}

ExponentialFit fit_exponential(std::span<const double> durations) {
    if (durations.empty()) throw input_error("fit_exponential: no durations");
    double sum = 0.0;
    for (double d : durations) {
        if (d < 0.0) throw input_error("fit_exponential: negative duration");
        sum += d;
    }
    if (sum == 0.0) throw input_error("fit_exponential: all durations are zero");
    return {sum / static_cast<double>(durations.size()), durations.size()};
}

ExponentialFit fit_exponential(std::span<const Session> sessions,
                               std::optional<std::int64_t> censor_after) {
    std::vector<double> durations;
    for (const auto& s : sessions) {
        if (censor_after && s.end >= *censor_after) continue;
        durations.push_back(static_cast<double>(s.duration()));
    }
    return fit_exponential(durations);
}

double connection_lifetime(double mean_degree, double departures_per_hour) {
    if (!(departures_per_hour > 0.0)) throw input_error("departure rate must be positive");
    if (!(mean_degree > 0.0)) throw input_error("mean degree must be positive");
    const double per_connection = departures_per_hour / mean_degree;
    return 1.0 / per_connection;
}

double drop_hazard(double departure_fraction) {
    if (!(departure_fraction >= 0.0 && departure_fraction < 1.0)) {
        throw input_error("departure fraction must lie in [0, 1)");
    }
    return -std::log1p(-departure_fraction);
}

double admitted_from_visible(double visible_arrivals, double hazard) {
    if (!(hazard >= 0.0)) throw input_error("hazard must be non-negative");
    if (hazard < 1e-12) return visible_arrivals;
    // An arrival at uniform time in the interval survives to its end with
    // probability (1 - e^-h) / h.
    return visible_arrivals * hazard / -std::expm1(-hazard);
}

double departure_correlation(std::span<const ChurnStep> steps, std::optional<int> truncate_at) {
    double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& s : steps) {
        if (truncate_at && (s.leaf_departures >= *truncate_at || s.ultra_departures >= *truncate_at)) {
            continue;
        }
        const double x = s.leaf_departures;
        const double y = s.ultra_departures;
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if (n < 2.0) throw input_error("departure_correlation needs at least two steps");
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    if (vx <= 0.0 || vy <= 0.0) throw input_error("departure_correlation: zero variance");
    return (sxy - sx * sy / n) / std::sqrt(vx * vy);
}

PeerMode infer_mode(const CrawlRecord& record) {
    if (record.mode() != PeerMode::Unknown) return record.mode();
    const auto s = record.state();
    return s.leaf <= 2 && s.ultra <= 10 ? PeerMode::Leaf : PeerMode::Ultra;
}

}  // namespace overlay_phase::churn
