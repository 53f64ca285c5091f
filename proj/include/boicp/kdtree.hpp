#pragma once

#include <vector>

#include <Eigen/Core>

#include "boicp/point_cloud.hpp"

namespace boicp {

/// Balanced kd-tree over a point cloud snapshot. Queries are exact: the
/// returned neighbor always has the minimum Euclidean distance over all
/// indexed points, with ties broken toward the lowest point index.
/// Immutable after construction; concurrent queries are safe.
class KdTree {
public:
    /// Copies the cloud's points. Throws std::invalid_argument on an empty cloud.
    explicit KdTree(const PointCloud& cloud);

    struct Neighbor {
        int index;
        double distance;
    };

    Neighbor nearest(const Eigen::Vector3d& query) const;

    std::size_t size() const { return points_.size(); }
    const Eigen::Vector3d& point(int index) const { return points_[index]; }

private:
    struct Node {
        int point;  // index into points_
        int axis;
        int left = -1;
        int right = -1;
    };

    int build(std::vector<int>& order, int begin, int end);
    void search(int node, const Eigen::Vector3d& q, int& best, double& best_sq) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Convenience alias mirroring the toolkit vocabulary.
inline KdTree build_index(const PointCloud& cloud) { return KdTree(cloud); }

}  // namespace boicp
