#pragma once

// Independent reference computations. Each one takes a different route from
// the library code it checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "overlay_phase/analytics.hpp"
#include "overlay_phase/core.hpp"
#include "overlay_phase/queue.hpp"

namespace oracle {

/// Erlang-B by the standard recursion B(0) = 1, B(k) = aB(k-1) / (k + aB(k-1)).
inline double erlang_b(double a, int m) {
    double b = 1.0;
    for (int k = 1; k <= m; ++k) b = a * b / (k + a * b);
    return b;
}

/// Stationary vector of a column-stochastic matrix by power iteration.
inline Eigen::VectorXd power_iteration(const Eigen::MatrixXd& t, int max_iter = 200000,
                                       double tol = 1e-15) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(t.rows(), 1.0 / static_cast<double>(t.rows()));
    for (int i = 0; i < max_iter; ++i) {
        Eigen::VectorXd y = t * x;
        y /= y.sum();
        if ((y - x).lpNorm<Eigen::Infinity>() < tol) return y;
        x = y;
    }
    return x;
}

/// Normalized null-space vector of a CTMC generator via full-pivot LU.
inline Eigen::VectorXd generator_null_space(const Eigen::MatrixXd& q) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(q);
    Eigen::MatrixXd kernel = lu.kernel();
    Eigen::VectorXd v = kernel.col(0);
    return v / v.sum();
}

/// Generator assembled entry by entry from birth-death rates: births at
/// rate lambda, deaths at rate (k + i) mu out of index i.
inline Eigen::MatrixXd birth_death_generator(double lambda, double mu, int m, int k) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int i = 0; i <= m; ++i) {
        if (i < m) q(i + 1, i) = lambda;
        if (i > 0) q(i - 1, i) = (k + i) * mu;
        q(i, i) = -q.col(i).sum();
    }
    return q;
}

inline double binomial_pmf(int n, int k, double p) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

inline double poisson_pmf(int n, double lambda) {
    double f = 1.0;
    for (int i = 1; i <= n; ++i) f *= i;
    return std::exp(-lambda) * std::pow(lambda, n) / f;
}

/// BDTM transfer matrix by enumerating (drops, arrivals) pairs: every one of
/// the k + j live connections drops with probability mu, then Poisson
/// arrivals come in, and the result is clamped to [k, k + m].
inline Eigen::MatrixXd bdtm_enumerate(const overlay_phase::queue::QueueParams& p,
                                      int poisson_terms = 30) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p.m + 1, p.m + 1);
    for (int j = 0; j <= p.m; ++j) {
        const int live = p.k + j;
        for (int drops = 0; drops <= live; ++drops) {
            const double pd = binomial_pmf(live, drops, p.mu);
            double tail = 1.0;
            for (int a = 0; a < poisson_terms; ++a) {
                const double pa = poisson_pmf(a, p.lambda);
                tail -= pa;
                const int next = std::clamp(live - drops + a, p.k, p.k + p.m);
                t(next - p.k, j) += pd * pa;
            }
            // Whatever lies beyond the enumerated terms can only overflow.
            t(p.m, j) += pd * std::max(0.0, tail);
        }
    }
    return t;
}

/// Region-index sequence sampled from a column-stochastic chain.
inline std::vector<int> sample_chain(const Eigen::Matrix4d& g, int start, std::size_t n,
                                     unsigned seed) {
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> out{start};
    int s = start;
    for (std::size_t i = 1; i < n; ++i) {
        double r = u(engine), acc = 0.0;
        int next = 3;
        for (int k = 0; k < 4; ++k) {
            acc += g(k, s);
            if (r < acc) {
                next = k;
                break;
            }
        }
        out.push_back(next);
        s = next;
    }
    return out;
}

/// One representative lattice point per region of the LimeWire profile.
inline overlay_phase::PhaseState region_point(int region) {
    switch (region) {
        case 0: return {1, 3};    // LSR
        case 1: return {30, 32};  // USR
        case 2: return {10, 25};  // TB
        default: return {20, 10}; // UDR
    }
}

/// The printed region transfer matrices (column j: from region j).
inline Eigen::Matrix4d g_limewire() {
    Eigen::Matrix4d g;
    g << 0.9878, 0.0023, 0.0401, 0.0116,
         0.0029, 0.9325, 0.3666, 0.0787,
         0.0089, 0.0645, 0.5880, 0.1829,
         0.0005, 0.0007, 0.0052, 0.7269;
    return g;
}

inline Eigen::Matrix4d g_bearshare() {
    Eigen::Matrix4d g;
    g << 0.9857, 0.0025, 0.0497, 0.0104,
         0.0009, 0.9616, 0.3655, 0.1062,
         0.0038, 0.0196, 0.5233, 0.0916,
         0.0096, 0.0163, 0.0615, 0.7919;
    return g;
}

}  // namespace oracle
