#include "boicp/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace boicp {

KdTree::KdTree(const PointCloud& cloud) : points_(cloud.points) {
    if (points_.empty()) throw std::invalid_argument("KdTree: empty cloud");
    nodes_.reserve(points_.size());
    std::vector<int> order(points_.size());
    std::iota(order.begin(), order.end(), 0);
    root_ = build(order, 0, static_cast<int>(order.size()));
}

int KdTree::build(std::vector<int>& order, int begin, int end) {
    if (begin >= end) return -1;

    // Split along the axis with the widest extent over this span.
    Eigen::Vector3d lo = points_[order[begin]];
    Eigen::Vector3d hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order[i]]);
        hi = hi.cwiseMax(points_[order[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    int mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });

    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{order[mid], axis});
    int left = build(order, begin, mid);
    int right = build(order, mid + 1, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

KdTree::Neighbor KdTree::nearest(const Eigen::Vector3d& query) const {
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    search(root_, query, best, best_sq);
    return {best, std::sqrt(best_sq)};
}

void KdTree::search(int node, const Eigen::Vector3d& q, int& best, double& best_sq) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    const Eigen::Vector3d& p = points_[n.point];

    double d_sq = (q - p).squaredNorm();
    if (d_sq < best_sq || (d_sq == best_sq && n.point < best)) {
        best = n.point;
        best_sq = d_sq;
    }

    double diff = q[n.axis] - p[n.axis];
    int near = diff < 0.0 ? n.left : n.right;
    int far = diff < 0.0 ? n.right : n.left;
    search(near, q, best, best_sq);
    // <= keeps equal-distance candidates reachable so the lowest-index tie rule holds.
    if (diff * diff <= best_sq) search(far, q, best, best_sq);
}

}  // namespace boicp
