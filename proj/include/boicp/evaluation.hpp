#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "boicp/geometry.hpp"
#include "boicp/point_cloud.hpp"

namespace boicp {

/// A reference/target pairing selected for benchmarking.
struct PairSpec {
    int ref_id = 0;
    int target_id = 0;
    double overlap = 0.0;  // fraction in [0,1]
    std::optional<RigidTransform> gt;  // maps target points into the reference frame
};

/// One benchmark run's recorded metrics.
struct RunRecord {
    PairSpec pair;
    std::string method;
    double mean_p2p = 0.0;
    std::optional<double> trans_err;  // meters, needs ground truth
    std::optional<double> rot_err;    // radians, needs ground truth
    double runtime_s = 0.0;
    std::uint64_t seed = 0;
};

/// Conservative overlap estimate: both clouds are voxel-downsampled at the
/// radius, each direction measures the fraction of points with a neighbor in
/// the other cloud within the radius, and the smaller fraction is returned.
/// Throws std::invalid_argument for radius <= 0 or an empty cloud.
double overlap_fraction(const PointCloud& a, const PointCloud& b, double radius);

/// Greedy pair selection over an ordered sequence: the target advances while
/// overlap with the current reference stays at or above the threshold; when
/// it would drop below, the pair is emitted at the last qualifying cloud and
/// that cloud becomes the new reference. Relative ground-truth transforms are
/// attached when poses are provided (poses[i] maps cloud i into the world).
std::vector<PairSpec> select_pairs(const std::vector<PointCloud>& sequence, double threshold,
                                   double overlap_radius,
                                   const std::vector<RigidTransform>* poses = nullptr);

struct WelchAnovaResult {
    double f_value;
    double p_value;
    double df1;
    double df2;
};

/// Welch's one-way ANOVA with Welch-Satterthwaite degrees of freedom.
/// Throws std::invalid_argument for fewer than 2 groups, a group smaller
/// than 2 samples, or a group with zero variance.
WelchAnovaResult welch_anova(std::span<const std::vector<double>> groups);

/// Regularized incomplete beta function I_x(a, b), by continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

/// Mean (not squared) nearest-neighbor distance of the transformed source
/// points against the reference cloud.
double mean_p2p_distance(const PointCloud& source, const PointCloud& reference,
                         const RigidTransform& t);

}  // namespace boicp
