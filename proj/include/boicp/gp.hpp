#pragma once

#include <Eigen/Core>

#include "boicp/geometry.hpp"

namespace boicp {

enum class KernelType { kSquaredExponential, kMatern52 };

/// Stationary covariance over normalized [0,1]^d inputs.
struct Kernel {
    KernelType type = KernelType::kMatern52;
    Eigen::VectorXd length_scales;  // per dimension, normalized units
    double signal_variance = 1.0;

    /// Matern-5/2, length scale 0.2 on every axis, unit signal variance.
    static Kernel defaults(int dim);

    double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

    void validate(int dim) const;
};

/// Maps a pose into the unit cube given per-axis bounds. Throws
/// std::invalid_argument if the pose lies outside the bounds.
Vector6d normalize(const PoseVector& p, const SearchBounds& b);

/// Gaussian-process posterior over objective values. Targets are
/// standardized internally (zero mean, unit variance over the training set);
/// posterior queries are reported back in objective units. Immutable:
/// update() returns a new model.
class GpModel {
public:
    /// X is n x d with rows in [0,1]^d. Cholesky failures walk a jitter
    /// ladder from 1e-10 to 1e-6 before throwing NumericalError.
    static GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Kernel kernel,
                       double noise_variance);

    /// Refit on the training set plus one observation.
    GpModel update(const Eigen::VectorXd& x, double y) const;

    struct Posterior {
        double mean;
        double variance;  // clamped at 0
    };

    Posterior posterior(const Eigen::VectorXd& x) const;

    int dimension() const { return static_cast<int>(x_.cols()); }
    int size() const { return static_cast<int>(x_.rows()); }
    const Eigen::MatrixXd& inputs() const { return x_; }
    const Eigen::VectorXd& targets() const { return y_raw_; }
    const Kernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_; }

private:
    GpModel() = default;

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_raw_;
    Eigen::VectorXd alpha_;   // (K + noise I)^-1 y_std
    Eigen::MatrixXd chol_;    // lower-triangular factor of K + noise I
    Kernel kernel_;
    double noise_ = 1e-6;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
};

}  // namespace boicp
