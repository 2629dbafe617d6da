#pragma once

#include <vector>

#include <Eigen/Dense>

#include "overlay_phase/core.hpp"

namespace overlay_phase::queue {

/// One M/M/m/m loss system. States are indices 0..m, i.e. degrees k..k+m.
/// Rates are per crawl interval (30 min).
struct QueueParams {
    double lambda = 0.0;  // connection-effort arrival rate
    double mu = 0.0;      // per-connection drop rate (CTDM) or probability (BDTM)
    int m = 1;
    int k = 0;            // floor degree: 0 for leaf, L_u for ultra

    int floor() const { return k; }
    int cap() const { return k + m; }
    int states() const { return m + 1; }
    /// `discrete` additionally requires mu <= 1. Throws Model error.
    void validate(bool discrete = false) const;

    static QueueParams leaf(double lambda, double mu, const QueueLimits& limits);
    static QueueParams ultra(double lambda, double mu, const QueueLimits& limits);
    /// Same system on a time step of `dt` intervals: (lambda * dt, mu * dt).
    QueueParams scaled(double dt) const;
};

/// Leaf and ultra chains of the double model; they evolve independently.
struct DoubleModel {
    QueueParams leaf;
    QueueParams ultra;

    /// Measured LimeWire operating point: lambda_l = 9.5, lambda_u = 8 per
    /// interval, mu = measured departures / mean degree (5.8 / 27.8507 leaf,
    /// 4.8 / 29.9443 ultra), B_l = 30, B_u = 32, L_u = 20.
    static DoubleModel limewire();
    /// Alternative reading of the published figure parameters, taking
    /// "mu_l = 9.5" literally with lambda_l from the u/(1-q) estimate (9.0625).
    static DoubleModel limewire_literal();
};

/// Degree distribution over floor..cap.
struct EquilibriumDist {
    int floor = 0;
    std::vector<double> probs;

    int cap() const { return floor + static_cast<int>(probs.size()) - 1; }
    double at_degree(int degree) const;
    double top() const { return probs.back(); }
    double mean_degree() const;
    Eigen::VectorXd vector() const;
};

/// Tridiagonal generator, column convention: Q(i+1, i) = lambda,
/// Q(i-1, i) = (k+i) mu, columns sum to zero.
Eigen::MatrixXd ctdm_generator(const QueueParams& params);

/// Closed form p_i proportional to (lambda/mu)^i k!/(k+i)!.
EquilibriumDist ctdm_equilibrium(const QueueParams& params);

/// Loss probability of the CTDM system, i.e. the mass of the full-slot state.
double blocking_probability(const QueueParams& params);

/// One-interval transition matrix exp(Q dt) of the CTDM chain.
Eigen::MatrixXd ctdm_transfer(const QueueParams& params, double dt = 1.0);

/// lambda = u / (1 - q). Throws Input error unless 0 <= q < 1 and u >= 0.
double estimate_lambda(double q, double u);

/// Per-connection drop rate from mean departures per interval and mean degree.
double calibrate_mu(double mean_departures, double mean_degree);

struct AdmissionSplit {
    double admitted = 0.0;
    double rejected = 0.0;
};
AdmissionSplit admitted_rejected(double lambda, double loss_prob);

/// Binomial-thinning transfer matrix: from degree d, Binomial(d, mu) drops and
/// Poisson(lambda) arrivals; results past the cap fold into the cap, results
/// below the floor into the floor. Columns sum to one.
Eigen::MatrixXd bdtm_transfer(const QueueParams& params);

/// Stationary distribution of a BDTM transfer matrix. Throws Model error when
/// the chain is reducible.
EquilibriumDist bdtm_equilibrium(const Eigen::MatrixXd& t, int floor = 0);

}  // namespace overlay_phase::queue
