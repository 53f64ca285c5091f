#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "boicp/geometry.hpp"
#include "boicp/point_cloud.hpp"

namespace boicp::testutil {

inline constexpr double kPi = 3.14159265358979323846;

/// Uniform points in an axis-aligned box.
inline PointCloud random_box_cloud(int n, const Eigen::Vector3d& extent, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PointCloud cloud;
    cloud.points.reserve(n);
    for (int i = 0; i < n; ++i)
        cloud.points.push_back({u(rng) * extent.x(), u(rng) * extent.y(), u(rng) * extent.z()});
    return cloud;
}

/// Desk-scale scene with asymmetric structure: ground patch, wall, a post,
/// and a box cluster. Gives ICP meaningful geometry to lock onto.
inline PointCloud structured_scene(int n, std::mt19937& rng, double noise = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    PointCloud cloud;
    cloud.points.reserve(n);
    auto jitter = [&]() -> Eigen::Vector3d {
        if (noise <= 0.0) return Eigen::Vector3d::Zero();
        return Eigen::Vector3d(g(rng), g(rng), g(rng)) * noise;
    };
    for (int i = 0; i < n; ++i) {
        double pick = u(rng);
        Eigen::Vector3d p;
        if (pick < 0.35) {  // ground, 4 x 3
            p = {u(rng) * 4.0, u(rng) * 3.0, 0.0};
        } else if (pick < 0.60) {  // wall along x = 0
            p = {0.0, u(rng) * 3.0, u(rng) * 2.0};
        } else if (pick < 0.75) {  // thin post
            double a = u(rng) * 2.0 * kPi;
            p = {3.2 + 0.05 * std::cos(a), 0.5 + 0.05 * std::sin(a), u(rng) * 1.5};
        } else {  // box cluster
            p = {1.5 + u(rng) * 0.6, 1.2 + u(rng) * 0.4, 0.3 + u(rng) * 0.6};
        }
        cloud.points.push_back(p + jitter());
    }
    return cloud;
}

/// Rotation with a uniformly random axis and an angle drawn in [0, max_angle].
inline Eigen::Matrix3d random_rotation(double max_angle, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector3d axis(g(rng), g(rng), g(rng));
    axis.normalize();
    return Eigen::AngleAxisd(u(rng) * max_angle, axis).toRotationMatrix();
}

inline RigidTransform random_transform(double max_angle, double max_translation,
                                       std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RigidTransform t;
    t.rotation = random_rotation(max_angle, rng);
    t.translation = Eigen::Vector3d(u(rng), u(rng), u(rng)) * max_translation;
    return t;
}

/// Pose drawn uniformly inside the bounds, one value per axis.
inline PoseVector random_pose_in(const SearchBounds& b, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector6d v;
    for (int i = 0; i < 6; ++i) v[i] = b.lo[i] + u(rng) * (b.hi[i] - b.lo[i]);
    return PoseVector::from_vector(v);
}

/// Brute-force 1-NN: index and distance, ties to the lowest index.
inline std::pair<int, double> linear_scan_nn(const PointCloud& cloud, const Eigen::Vector3d& q) {
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        double d = (cloud.points[i] - q).squaredNorm();
        if (d < best_sq) {
            best = i;
            best_sq = d;
        }
    }
    return {best, std::sqrt(best_sq)};
}

inline double max_matrix_diff(const RigidTransform& a, const RigidTransform& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace boicp::testutil
