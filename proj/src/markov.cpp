#include "overlay_phase/markov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "overlay_phase/core.hpp"

namespace overlay_phase::markov {

double column_sum_defect(const Eigen::MatrixXd& t) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
        worst = std::max(worst, std::abs(t.col(j).sum() - 1.0));
    }
    return worst;
}

std::vector<std::vector<int>> closed_classes(const Eigen::MatrixXd& t) {
    const int n = static_cast<int>(t.rows());
    // reach[a][b]: b reachable from a
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (int a = 0; a < n; ++a) {
        reach[a][a] = 1;
        for (int b = 0; b < n; ++b) {
            if (t(b, a) > 0.0) reach[a][b] = 1;
        }
    }
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < n; ++a)
            if (reach[a][k])
                for (int b = 0; b < n; ++b)
                    if (reach[k][b]) reach[a][b] = 1;

    std::vector<int> component(n, -1);
    std::vector<std::vector<int>> classes;
    for (int a = 0; a < n; ++a) {
        if (component[a] >= 0) continue;
        std::vector<int> members;
        for (int b = 0; b < n; ++b) {
            if (reach[a][b] && reach[b][a]) {
                component[b] = static_cast<int>(classes.size());
                members.push_back(b);
            }
        }
        classes.push_back(std::move(members));
    }

    std::vector<std::vector<int>> closed;
    for (const auto& members : classes) {
        bool leaks = false;
        for (int a : members) {
            for (int b = 0; b < n && !leaks; ++b) {
                if (reach[a][b] && component[b] != component[a]) leaks = true;
            }
        }
        if (!leaks) closed.push_back(members);
    }
    return closed;
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& t, double tolerance) {
    const Eigen::Index n = t.rows();
    if (n == 0 || t.cols() != n) throw model_error("transfer matrix must be square and nonempty");
    if (t.minCoeff() < -tolerance || t.maxCoeff() > 1.0 + tolerance) {
        throw model_error("transfer matrix entries outside [0,1]");
    }
    if (const double defect = column_sum_defect(t); defect > tolerance) {
        std::ostringstream msg;
        msg << "transfer matrix is not column-stochastic (column sum off by " << defect << ")";
        throw model_error(msg.str());
    }
    const auto closed = closed_classes(t);
    if (closed.size() > 1) {
        std::ostringstream msg;
        msg << "reducible chain: " << closed.size() << " closed classes";
        for (const auto& members : closed) {
            msg << " {";
            for (std::size_t i = 0; i < members.size(); ++i) msg << (i ? "," : "") << members[i];
            msg << "}";
        }
        throw model_error(msg.str());
    }

    Eigen::MatrixXd a(n + 1, n);
    a.topRows(n) = t - Eigen::MatrixXd::Identity(n, n);
    a.row(n).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;
    Eigen::VectorXd h = a.colPivHouseholderQr().solve(b);
    h = h.cwiseMax(0.0);
    return h / h.sum();
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) throw invariant_error("total_variation: size mismatch");
    return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace overlay_phase::markov
