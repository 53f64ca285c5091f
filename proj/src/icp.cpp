#include "boicp/icp.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "boicp/errors.hpp"

namespace boicp {

void IcpConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("IcpConfig: max_iterations must be >= 1");
    if (!(rel_tolerance > 0.0)) throw std::invalid_argument("IcpConfig: rel_tolerance must be > 0");
    if (!(max_correspondence_dist > 0.0))
        throw std::invalid_argument("IcpConfig: max_correspondence_dist must be > 0");
}

std::vector<Correspondence> correspondences(const PointCloud& source, const KdTree& ref_index,
                                            const RigidTransform& t, double max_dist) {
    if (source.empty()) throw std::invalid_argument("correspondences: empty source cloud");
    std::vector<Correspondence> pairs;
    pairs.reserve(source.size());
    for (int i = 0; i < static_cast<int>(source.size()); ++i) {
        auto nn = ref_index.nearest(t.apply(source.points[i]));
        if (nn.distance <= max_dist) pairs.push_back({i, nn.index, nn.distance});
    }
    if (pairs.empty()) throw NoOverlapError("correspondences: no pair within max correspondence distance");
    return pairs;
}

double objective(const PointCloud& source, const KdTree& ref_index, const RigidTransform& t,
                 double max_dist) {
    auto pairs = correspondences(source, ref_index, t, max_dist);
    double sum = 0.0;
    for (const auto& c : pairs) sum += c.distance * c.distance;
    return sum / static_cast<double>(pairs.size());
}

RigidTransform solve_rigid(std::span<const PointPair> pairs) {
    if (pairs.size() < 3) throw DegenerateGeometryError("solve_rigid: need at least 3 pairs");

    double wsum = 0.0;
    Eigen::Vector3d src_centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d tgt_centroid = Eigen::Vector3d::Zero();
    for (const auto& p : pairs) {
        if (!(p.weight > 0.0)) throw std::invalid_argument("solve_rigid: weights must be > 0");
        wsum += p.weight;
        src_centroid += p.weight * p.source;
        tgt_centroid += p.weight * p.target;
    }
    src_centroid /= wsum;
    tgt_centroid /= wsum;

    Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
    for (const auto& p : pairs)
        cross += p.weight * (p.source - src_centroid) * (p.target - tgt_centroid).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d& sv = svd.singularValues();
    if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0])
        throw DegenerateGeometryError("solve_rigid: rank-deficient cross-covariance");

    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Vector3d d(1.0, 1.0, (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
    Eigen::Matrix3d r = v * d.asDiagonal() * u.transpose();
    return {r, tgt_centroid - r * src_centroid};
}

IcpResult run_icp(const PointCloud& source, const PointCloud& reference, const RigidTransform& t0,
                  const IcpConfig& cfg) {
    if (reference.size() < 3 || source.size() < 3)
        throw std::invalid_argument("run_icp: both clouds need at least 3 points");
    KdTree ref_index(reference);
    return run_icp_indexed(source, ref_index, t0, cfg);
}

IcpResult run_icp_indexed(const PointCloud& source, const KdTree& ref_index,
                          const RigidTransform& t0, const IcpConfig& cfg) {
    cfg.validate();
    if (source.size() < 3 || ref_index.size() < 3)
        throw std::invalid_argument("run_icp: both clouds need at least 3 points");

    auto stats = [](const std::vector<Correspondence>& pairs) {
        double sq = 0.0, lin = 0.0;
        for (const auto& c : pairs) {
            sq += c.distance * c.distance;
            lin += c.distance;
        }
        double n = static_cast<double>(pairs.size());
        return std::pair<double, double>{sq / n, lin / n};
    };

    IcpResult result;
    result.transform = t0;
    auto pairs = correspondences(source, ref_index, t0, cfg.max_correspondence_dist);
    auto [obj, p2p] = stats(pairs);
    result.objective = obj;
    result.mean_p2p = p2p;
    result.objective_trace.push_back(obj);

    std::vector<PointPair> fit_pairs;
    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        fit_pairs.clear();
        fit_pairs.reserve(pairs.size());
        for (const auto& c : pairs)
            fit_pairs.push_back({source.points[c.source_index], ref_index.point(c.ref_index)});

        RigidTransform next = solve_rigid(fit_pairs);
        pairs = correspondences(source, ref_index, next, cfg.max_correspondence_dist);
        auto [next_obj, next_p2p] = stats(pairs);

        double prev = result.objective;
        result.iterations_run = iter;
        if (next_obj > prev) {
            // No improvement (floating-point noise at a fixed point, or the
            // correspondence set changed under a finite gate): keep the
            // previous state so the objective sequence never increases.
            result.objective_trace.push_back(prev);
            result.converged = true;
            break;
        }
        result.transform = next;
        result.objective = next_obj;
        result.mean_p2p = next_p2p;
        result.objective_trace.push_back(next_obj);

        if (prev == 0.0 || (prev - next_obj) / prev < cfg.rel_tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace boicp
