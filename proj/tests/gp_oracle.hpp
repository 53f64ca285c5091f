#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "boicp/gp.hpp"

namespace boicp::testutil {

/// Dense-algebra GP oracle: explicit matrix inverse instead of a Cholesky
/// solve, with the same target standardization. Deliberately the slow road.
struct DenseGp {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    Kernel kernel;
    double noise;

    std::pair<double, double> posterior(const Eigen::VectorXd& q) const {
        const int n = static_cast<int>(x.rows());
        double mean = y.mean();
        double var = (y.array() - mean).square().sum() / n;
        double scale = (n > 1 && var > 1e-300) ? std::sqrt(var) : 1.0;
        Eigen::VectorXd ys = (y.array() - mean) / scale;

        Eigen::MatrixXd gram(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gram(i, j) = kernel(x.row(i), x.row(j));
        gram.diagonal().array() += noise;
        Eigen::MatrixXd inv = gram.fullPivLu().inverse();

        Eigen::VectorXd kstar(n);
        for (int i = 0; i < n; ++i) kstar[i] = kernel(x.row(i), q);
        double m = kstar.dot(inv * ys);
        double v = kernel(q, q) - kstar.dot(inv * kstar);
        if (v < 0.0) v = 0.0;
        return {mean + scale * m, scale * scale * v};
    }
};

}  // namespace boicp::testutil
