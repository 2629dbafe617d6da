#include "overlay_phase/queue.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "overlay_phase/markov.hpp"

namespace overlay_phase::queue {

void QueueParams::validate(bool discrete) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw model_error("lambda must be >= 0");
    if (discrete) {
        if (!(mu >= 0.0 && mu <= 1.0)) throw model_error("BDTM needs 0 <= mu <= 1");
    } else if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw model_error("CTDM needs mu > 0");
    }
    if (m < 1) throw model_error("m must be >= 1");
    if (k < 0) throw model_error("k must be >= 0");
}

QueueParams QueueParams::leaf(double lambda, double mu, const QueueLimits& limits) {
    return {lambda, mu, limits.leaf_max, 0};
}

QueueParams QueueParams::ultra(double lambda, double mu, const QueueLimits& limits) {
    return {lambda, mu, limits.ultra_max - limits.ultra_active, limits.ultra_active};
}

QueueParams QueueParams::scaled(double dt) const { return {lambda * dt, mu * dt, m, k}; }

DoubleModel DoubleModel::limewire() {
    const QueueLimits limits;
    return {QueueParams::leaf(9.5, calibrate_mu(5.8, 27.8507), limits),
            QueueParams::ultra(8.0, calibrate_mu(4.8, 29.9443), limits)};
}

DoubleModel DoubleModel::limewire_literal() {
    const QueueLimits limits;
    return {QueueParams::leaf(estimate_lambda(0.36, 5.8), 9.5, limits),
            QueueParams::ultra(8.0, calibrate_mu(4.8, 29.9443), limits)};
}

double EquilibriumDist::at_degree(int degree) const {
    if (degree < floor || degree > cap()) return 0.0;
    return probs[degree - floor];
}

double EquilibriumDist::mean_degree() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) m += (floor + static_cast<double>(i)) * probs[i];
    return m;
}

Eigen::VectorXd EquilibriumDist::vector() const {
    return Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
}

Eigen::MatrixXd ctdm_generator(const QueueParams& params) {
    params.validate();
    const int n = params.states();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        if (i + 1 < n) q(i + 1, i) = params.lambda;
        if (i > 0) q(i - 1, i) = (params.k + i) * params.mu;
        q(i, i) = -q.col(i).sum();
    }
    return q;
}

EquilibriumDist ctdm_equilibrium(const QueueParams& params) {
    params.validate();
    const double a = params.lambda / params.mu;
    // w_{i+1} = w_i * a / (k+i+1); rescale to keep the largest term at 1.
    std::vector<double> w(params.states());
    w[0] = 1.0;
    for (int i = 0; i < params.m; ++i) {
        w[i + 1] = w[i] * a / (params.k + i + 1);
        if (w[i + 1] > 1e200) {
            for (int j = 0; j <= i + 1; ++j) w[j] *= 1e-200;
        }
    }
    double total = 0.0;
    for (double v : w) total += v;
    EquilibriumDist dist{params.k, {}};
    dist.probs.reserve(w.size());
    for (double v : w) dist.probs.push_back(v / total);
    return dist;
}

double blocking_probability(const QueueParams& params) { return ctdm_equilibrium(params).top(); }

Eigen::MatrixXd ctdm_transfer(const QueueParams& params, double dt) {
    if (!(dt > 0.0)) throw model_error("time step must be positive");
    Eigen::MatrixXd t = (ctdm_generator(params) * dt).exp();
    t = t.cwiseMax(0.0);
    for (Eigen::Index j = 0; j < t.cols(); ++j) t.col(j) /= t.col(j).sum();
    return t;
}

double estimate_lambda(double q, double u) {
    if (!(q >= 0.0 && q < 1.0)) throw input_error("estimate_lambda needs 0 <= q < 1");
    if (!(u >= 0.0)) throw input_error("estimate_lambda needs u >= 0");
    return u / (1.0 - q);
}

double calibrate_mu(double mean_departures, double mean_degree) {
    if (!(mean_degree > 0.0)) throw input_error("mean degree must be positive");
    if (!(mean_departures >= 0.0)) throw input_error("mean departures must be >= 0");
    return mean_departures / mean_degree;
}

AdmissionSplit admitted_rejected(double lambda, double loss_prob) {
    if (!(loss_prob >= 0.0 && loss_prob <= 1.0)) throw input_error("loss probability outside [0,1]");
    if (!(lambda >= 0.0)) throw input_error("lambda must be >= 0");
    return {lambda * (1.0 - loss_prob), lambda * loss_prob};
}

namespace {

std::vector<double> binomial_pmf(int n, double p) {
    std::vector<double> pmf(n + 1, 0.0);
    if (p <= 0.0) {
        pmf[0] = 1.0;
        return pmf;
    }
    if (p >= 1.0) {
        pmf[n] = 1.0;
        return pmf;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k) {
        const double lchoose = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        pmf[k] = std::exp(lchoose + k * lp + (n - k) * lq);
    }
    return pmf;
}

}  // namespace

Eigen::MatrixXd bdtm_transfer(const QueueParams& params) {
    params.validate(true);
    const int n = params.states();
    const int cap = params.cap();
    // Poisson pmf up to the largest jump that can still land below the cap.
    std::vector<double> poisson(cap + 1, 0.0);
    poisson[0] = std::exp(-params.lambda);
    for (int a = 1; a <= cap; ++a) poisson[a] = poisson[a - 1] * params.lambda / a;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        const int degree = params.k + j;
        const auto drops = binomial_pmf(degree, params.mu);
        for (int dropped = 0; dropped <= degree; ++dropped) {
            if (drops[dropped] == 0.0) continue;
            const int base = degree - dropped;
            double below_cap = 0.0;
            for (int a = 0; base + a < cap; ++a) {
                const int index = std::max(base + a - params.k, 0);
                t(index, j) += drops[dropped] * poisson[a];
                below_cap += poisson[a];
            }
            t(n - 1, j) += drops[dropped] * std::max(0.0, 1.0 - below_cap);
        }
    }
    return t;
}

EquilibriumDist bdtm_equilibrium(const Eigen::MatrixXd& t, int floor) {
    const Eigen::VectorXd h = markov::stationary(t, 1e-9);
    return {floor, std::vector<double>(h.data(), h.data() + h.size())};
}

}  // namespace overlay_phase::queue
