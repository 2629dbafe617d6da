#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "overlay_phase/core.hpp"

namespace overlay_phase::churn {

struct ChurnStep {
    std::string peer_id;
    std::size_t interval = 0;  // index of the earlier record
    PhaseState from;
    PhaseState to;
    double degree_change = 0.0;  // Euclidean norm of the state difference
    int leaf_departures = 0;
    int ultra_departures = 0;
    int leaf_arrivals = 0;
    int ultra_arrivals = 0;
};

std::vector<ChurnStep> churn_steps(const PeerTrace& trace);

enum class Side { Leaf, Ultra };

/// Steps qualify when the starting state has d_l >= min_leaf and d_u >= min_ultra.
struct ModeFilter {
    int min_leaf = 10;
    int min_ultra = 10;
    static ModeFilter none() { return {0, 0}; }
};

/// Normalized departure-count frequencies.
struct Histogram {
    std::vector<double> freq;  // freq[k] = fraction of steps with k departures
    std::int64_t n = 0;
    bool empty() const { return n == 0; }
    double mean() const;
};

Histogram departure_histogram(std::span<const ChurnStep> steps, Side side,
                              const ModeFilter& filter = {});
Histogram histogram_of(std::span<const int> counts);

enum class PoissonMethod { MeanMinusOne, HeadKMean };

struct PoissonFit {
    double lambda_hat = 0.0;
    double raw_mean = 0.0;  // mean of the whole histogram, before calibration
    PoissonMethod method = PoissonMethod::MeanMinusOne;
    int k = 0;
};

/// MeanMinusOne: max(0, mean - 1). HeadKMean: mean over counts 0..k-1 after
/// renormalization. Throws Input error for an empty histogram.
PoissonFit fit_poisson(const Histogram& hist, PoissonMethod method, int k = 11);

struct Session {
    std::string peer_id;
    std::int64_t start = 0;
    std::int64_t end = 0;
    std::int64_t duration() const { return end - start; }
};

/// Splits where consecutive responses are more than `break_time` seconds apart.
std::vector<Session> sessions(const PeerTrace& trace, std::int64_t break_time);

struct ExponentialFit {
    double mean_seconds = 0.0;
    std::size_t n = 0;
    double mean_hours() const { return mean_seconds / 3600.0; }
    double rate_per_hour() const { return 3600.0 / mean_seconds; }
};

/// Maximum-likelihood exponential fit (rate = 1 / mean). Throws Input error for
/// no durations or all-zero durations.
ExponentialFit fit_exponential(std::span<const double> durations_seconds);
/// Sessions still open at `censor_after` (end >= censor_after) are dropped first.
ExponentialFit fit_exponential(std::span<const Session> sessions,
                               std::optional<std::int64_t> censor_after = std::nullopt);

/// Mean connection life in hours: mean_degree / departures_per_hour.
double connection_lifetime(double mean_degree, double departures_per_hour);

/// Snapshot crawls miss connections that open and close between two
/// responses. For exponential connection lives, the fraction f of a
/// response's neighbors gone by the next one gives the per-interval drop
/// hazard -ln(1 - f).
double drop_hazard(double departure_fraction);

/// Connections admitted per interval, recovered from the arrivals visible in
/// snapshots (those still present at the next response) given the drop hazard.
double admitted_from_visible(double visible_arrivals, double hazard);

/// Pearson correlation of leaf vs ultra departures, optionally restricted to
/// steps where both counts are below `truncate_at`.
double departure_correlation(std::span<const ChurnStep> steps,
                             std::optional<int> truncate_at = std::nullopt);

/// Reported mode, or the degree rule d_l <= 2 and d_u <= 10 for Unknown.
PeerMode infer_mode(const CrawlRecord& record);

}  // namespace overlay_phase::churn
