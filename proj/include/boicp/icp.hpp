#pragma once

#include <limits>
#include <span>
#include <vector>

#include "boicp/geometry.hpp"
#include "boicp/kdtree.hpp"
#include "boicp/point_cloud.hpp"

namespace boicp {

struct IcpConfig {
    int max_iterations = 50;
    double rel_tolerance = 1e-6;
    /// Pairs whose nearest-neighbor distance exceeds this are dropped.
    /// Infinite (the default) pairs every source point.
    double max_correspondence_dist = std::numeric_limits<double>::infinity();

    void validate() const;
};

struct IcpResult {
    RigidTransform transform;
    double objective = 0.0;  // mean squared correspondence distance, m^2
    double mean_p2p = 0.0;   // mean correspondence distance, m
    int iterations_run = 0;
    bool converged = false;
    /// Objective after the initial matching and after every iteration.
    std::vector<double> objective_trace;
};

struct Correspondence {
    int source_index;
    int ref_index;
    double distance;
};

struct PointPair {
    Eigen::Vector3d source;
    Eigen::Vector3d target;
    double weight = 1.0;
};

/// Pairs every source point (transformed by T) with its nearest reference
/// point, dropping pairs beyond max_dist. Throws NoOverlapError when no
/// pair survives.
std::vector<Correspondence> correspondences(const PointCloud& source, const KdTree& ref_index,
                                            const RigidTransform& t,
                                            double max_dist = std::numeric_limits<double>::infinity());

/// Mean squared correspondence distance of the transformed source against
/// the indexed reference. Throws NoOverlapError when no pair survives.
double objective(const PointCloud& source, const KdTree& ref_index, const RigidTransform& t,
                 double max_dist = std::numeric_limits<double>::infinity());

/// Least-squares rigid transform for the given pairs via centroid alignment
/// and SVD of the weighted cross-covariance, with reflection correction.
/// Throws DegenerateGeometryError for fewer than 3 pairs or a rank-deficient
/// covariance (collinear or coincident points).
RigidTransform solve_rigid(std::span<const PointPair> pairs);

/// Point-to-point ICP: alternates correspondence search and rigid solves
/// from T0 until the relative objective decrease falls below rel_tolerance
/// or max_iterations is reached.
IcpResult run_icp(const PointCloud& source, const PointCloud& reference, const RigidTransform& t0,
                  const IcpConfig& cfg = {});

/// Same loop against a prebuilt reference index (the optimizer reuses one
/// index across many evaluations).
IcpResult run_icp_indexed(const PointCloud& source, const KdTree& ref_index,
                          const RigidTransform& t0, const IcpConfig& cfg = {});

}  // namespace boicp
