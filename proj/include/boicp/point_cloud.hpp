#pragma once

#include <vector>

#include <Eigen/Core>

#include "boicp/geometry.hpp"

namespace boicp {

/// Flat container of 3D points in meters.
struct PointCloud {
    std::vector<Eigen::Vector3d> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    PointCloud transformed(const RigidTransform& t) const {
        PointCloud out;
        out.points.reserve(points.size());
        for (const auto& p : points) out.points.push_back(t.apply(p));
        return out;
    }
};

/// One output point per occupied voxel, placed at the centroid of the
/// voxel's points. Cell index is floor(coordinate / voxel) per axis; output
/// cells appear in first-occurrence order of the input. Throws
/// std::invalid_argument for voxel <= 0 or an empty cloud.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

}  // namespace boicp
