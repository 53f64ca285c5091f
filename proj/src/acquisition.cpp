#include "boicp/acquisition.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace boicp {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

}  // namespace

void AcquisitionConfig::validate() const {
    if (xi < 0.0) throw std::invalid_argument("AcquisitionConfig: xi must be >= 0");
    if (n_candidates < 1) throw std::invalid_argument("AcquisitionConfig: n_candidates must be >= 1");
    if (n_refine < 0) throw std::invalid_argument("AcquisitionConfig: n_refine must be >= 0");
}

double expected_improvement(double mean, double variance, double y_star, double xi) {
    if (variance < -1e-8) throw std::invalid_argument("expected_improvement: negative variance");
    if (variance < 0.0) variance = 0.0;
    double gap = y_star - xi - mean;
    double sigma = std::sqrt(variance);
    if (sigma == 0.0) return gap > 0.0 ? gap : 0.0;
    double z = gap / sigma;
    double ei = gap * normal_cdf(z) + sigma * normal_pdf(z);
    return ei > 0.0 ? ei : 0.0;
}

namespace {

double score_at(const GpModel& model, const Eigen::VectorXd& u, double y_star, double xi,
                bool mean_mode) {
    auto post = model.posterior(u);
    if (mean_mode) return -post.mean;  // maximize the negated mean = chase the lowest mean
    return expected_improvement(post.mean, post.variance, y_star, xi);
}

// Golden-section maximization of the score along one coordinate, clipped to
// [0,1]. Returns the best probed coordinate value.
double polish_axis(const GpModel& model, Eigen::VectorXd& u, int axis, double radius,
                   double y_star, double xi, bool mean_mode) {
    constexpr double kGolden = 0.6180339887498949;
    double a = std::max(0.0, u[axis] - radius);
    double b = std::min(1.0, u[axis] + radius);
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    auto eval = [&](double v) {
        double saved = u[axis];
        u[axis] = v;
        double s = score_at(model, u, y_star, xi, mean_mode);
        u[axis] = saved;
        return s;
    };
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < 24; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = eval(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = eval(x1);
        }
    }
    return f1 >= f2 ? x1 : x2;
}

}  // namespace

AcquisitionPoint argmax_ei_normalized(const GpModel& model, double y_star,
                                      const AcquisitionConfig& cfg, UniformRng& rng) {
    cfg.validate();
    const int d = model.dimension();

    Eigen::VectorXd best = Eigen::VectorXd::Zero(d);
    double best_ei = -1.0;
    Eigen::VectorXd best_mean_point = Eigen::VectorXd::Zero(d);
    double best_mean = std::numeric_limits<double>::infinity();

    Eigen::VectorXd u(d);
    for (int c = 0; c < cfg.n_candidates; ++c) {
        for (int k = 0; k < d; ++k) u[k] = rng.next();
        auto post = model.posterior(u);
        double ei = expected_improvement(post.mean, post.variance, y_star, cfg.xi);
        if (ei > best_ei) {  // strict: ties keep the earlier candidate
            best_ei = ei;
            best = u;
        }
        if (post.mean < best_mean) {
            best_mean = post.mean;
            best_mean_point = u;
        }
    }

    AcquisitionPoint result;
    result.mean_fallback = best_ei <= 0.0;
    Eigen::VectorXd current = result.mean_fallback ? best_mean_point : best;
    double current_score = score_at(model, current, y_star, cfg.xi, result.mean_fallback);

    double radius = 0.25;
    for (int step = 0; step < cfg.n_refine; ++step) {
        int axis = step % d;
        double candidate = polish_axis(model, current, axis, radius, y_star, cfg.xi,
                                       result.mean_fallback);
        double saved = current[axis];
        current[axis] = candidate;
        double s = score_at(model, current, y_star, cfg.xi, result.mean_fallback);
        if (s >= current_score) {
            current_score = s;
        } else {
            current[axis] = saved;  // polish may only improve
        }
        if (axis == d - 1) radius *= 0.5;
    }

    result.point = current;
    result.ei = result.mean_fallback ? 0.0 : current_score;
    return result;
}

PoseAcquisition argmax_ei(const GpModel& model, const SearchBounds& bounds, double y_star,
                          const AcquisitionConfig& cfg, UniformRng& rng) {
    if (model.dimension() != 6)
        throw std::invalid_argument("argmax_ei: pose-space wrapper requires a 6-d model");
    bounds.validate();
    AcquisitionPoint p = argmax_ei_normalized(model, y_star, cfg, rng);
    Vector6d v = bounds.lo + p.point.cwiseProduct(bounds.hi - bounds.lo);
    return {PoseVector::from_vector(v), p.ei, p.mean_fallback};
}

}  // namespace boicp
