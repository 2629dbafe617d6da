#pragma once

#include <vector>

#include <Eigen/Dense>

namespace overlay_phase::markov {

/// Column-stochastic convention throughout: T(i, j) = P(next = i | current = j).

/// Largest |column sum - 1| of `t`.
double column_sum_defect(const Eigen::MatrixXd& t);

/// Strongly connected components of the transition graph (edge j -> i when
/// t(i, j) > 0) that no mass leaves. More than one means the stationary vector
/// is not unique.
std::vector<std::vector<int>> closed_classes(const Eigen::MatrixXd& t);

/// Stationary vector of a column-stochastic matrix whose columns sum to one
/// within `tolerance`. Solves [T - I; 1^T] h = [0; 1] in the least-squares
/// sense, which is exact for a stochastic T. Throws Model error when the chain
/// has several closed classes, listing them.
Eigen::VectorXd stationary(const Eigen::MatrixXd& t, double tolerance = 1e-9);

/// Total-variation distance between two distributions of equal length.
double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

}  // namespace overlay_phase::markov
