#include "boicp/gp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "boicp/errors.hpp"

namespace boicp {

Kernel Kernel::defaults(int dim) {
    Kernel k;
    k.length_scales = Eigen::VectorXd::Constant(dim, 0.2);
    return k;
}

void Kernel::validate(int dim) const {
    if (length_scales.size() != dim)
        throw std::invalid_argument("Kernel: length_scales dimension mismatch");
    if ((length_scales.array() <= 0.0).any())
        throw std::invalid_argument("Kernel: length scales must be > 0");
    if (!(signal_variance > 0.0)) throw std::invalid_argument("Kernel: signal variance must be > 0");
}

double Kernel::operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double r2 = ((a - b).array() / length_scales.array()).square().sum();
    switch (type) {
        case KernelType::kSquaredExponential:
            return signal_variance * std::exp(-0.5 * r2);
        case KernelType::kMatern52: {
            double r = std::sqrt(r2);
            double s = std::sqrt(5.0) * r;
            return signal_variance * (1.0 + s + 5.0 * r2 / 3.0) * std::exp(-s);
        }
    }
    return 0.0;
}

Vector6d normalize(const PoseVector& p, const SearchBounds& b) {
    if (!b.contains(p)) throw std::invalid_argument("normalize: pose outside search bounds");
    Vector6d v = p.vector();
    return (v - b.lo).cwiseQuotient(b.hi - b.lo);
}

GpModel GpModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Kernel kernel,
                     double noise_variance) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    if (n < 1) throw std::invalid_argument("GpModel::fit: need at least one observation");
    if (y.size() != n) throw std::invalid_argument("GpModel::fit: x/y size mismatch");
    if (!(noise_variance > 0.0)) throw std::invalid_argument("GpModel::fit: noise variance must be > 0");
    kernel.validate(d);

    GpModel m;
    m.x_ = x;
    m.y_raw_ = y;
    m.kernel_ = std::move(kernel);
    m.noise_ = noise_variance;

    m.y_mean_ = y.mean();
    double var = (y.array() - m.y_mean_).square().sum() / static_cast<double>(n);
    m.y_scale_ = (n > 1 && var > 1e-300) ? std::sqrt(var) : 1.0;
    Eigen::VectorXd y_std = (y.array() - m.y_mean_) / m.y_scale_;

    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double k = m.kernel_(x.row(i), x.row(j));
            gram(i, j) = k;
            gram(j, i) = k;
        }
    }

    // Jitter ladder: 0, then 1e-10 through 1e-6.
    double jitter = 0.0;
    for (;;) {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += m.noise_ + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            m.chol_ = llt.matrixL();
            m.alpha_ = llt.solve(y_std);
            return m;
        }
        if (jitter == 0.0)
            jitter = 1e-10;
        else if (jitter < 1e-6)
            jitter *= 10.0;
        else
            throw NumericalError("GpModel::fit: Cholesky failed with jitter ladder exhausted");
    }
}

GpModel GpModel::update(const Eigen::VectorXd& x, double y) const {
    if (x.size() != dimension()) throw std::invalid_argument("GpModel::update: dimension mismatch");
    Eigen::MatrixXd x_new(size() + 1, dimension());
    x_new.topRows(size()) = x_;
    x_new.row(size()) = x.transpose();
    Eigen::VectorXd y_new(size() + 1);
    y_new.head(size()) = y_raw_;
    y_new[size()] = y;
    return fit(x_new, y_new, kernel_, noise_);
}

GpModel::Posterior GpModel::posterior(const Eigen::VectorXd& x) const {
    if (x.size() != dimension()) throw std::invalid_argument("GpModel::posterior: dimension mismatch");
    const int n = size();
    Eigen::VectorXd kstar(n);
    for (int i = 0; i < n; ++i) kstar[i] = kernel_(x_.row(i), x);

    double mean_std = kstar.dot(alpha_);
    Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kstar);
    double var_std = kernel_(x, x) - v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;

    return {y_mean_ + y_scale_ * mean_std, y_scale_ * y_scale_ * var_std};
}

}  // namespace boicp
