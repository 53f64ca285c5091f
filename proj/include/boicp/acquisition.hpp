#pragma once

#include <Eigen/Core>

#include "boicp/geometry.hpp"
#include "boicp/gp.hpp"
#include "boicp/rng.hpp"

namespace boicp {

struct AcquisitionConfig {
    double xi = 0.0;        // exploration offset, objective units
    int n_candidates = 2000;
    int n_refine = 20;      // coordinate-wise polish steps after the sweep

    void validate() const;
};

/// Expected improvement under minimization: the expected amount by which a
/// Gaussian with the given mean and variance undercuts y_star - xi.
/// Negative variance beyond -1e-8 throws std::invalid_argument; small
/// negative values are clamped to zero.
double expected_improvement(double mean, double variance, double y_star, double xi = 0.0);

struct AcquisitionPoint {
    Eigen::VectorXd point;  // normalized, in [0,1]^d
    double ei = 0.0;
    /// Set when every candidate had zero EI and the point with the lowest
    /// posterior mean was returned instead.
    bool mean_fallback = false;
};

/// Maximizes EI over the unit cube of the model's input space: a uniform
/// candidate sweep followed by coordinate-wise golden-section polish steps
/// that only ever accept improvements. Deterministic for a given rng state.
AcquisitionPoint argmax_ei_normalized(const GpModel& model, double y_star,
                                      const AcquisitionConfig& cfg, UniformRng& rng);

struct PoseAcquisition {
    PoseVector pose;
    double ei = 0.0;
    bool mean_fallback = false;
};

/// Six-dimensional convenience wrapper: runs the normalized maximizer and
/// maps the result back through the search bounds.
PoseAcquisition argmax_ei(const GpModel& model, const SearchBounds& bounds, double y_star,
                          const AcquisitionConfig& cfg, UniformRng& rng);

}  // namespace boicp
