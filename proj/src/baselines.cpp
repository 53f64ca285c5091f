#include "boicp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "boicp/errors.hpp"
#include "boicp/kdtree.hpp"
#include "boicp/rng.hpp"

namespace boicp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GridNode {
    Eigen::Vector3d coords;  // values on the stage's three active axes
    long fitness = 0;
    double cell_width_scale = 1.0;  // fraction of the level-1 cell width
    std::size_t order = 0;          // insertion index, used for tie-breaking
};

/// Number of transformed source points with a reference neighbor within radius.
long radius_fitness(const PointCloud& source, const KdTree& ref_index, const RigidTransform& t,
                    double radius) {
    long hits = 0;
    for (const auto& p : source.points)
        if (ref_index.nearest(t.apply(p)).distance <= radius) ++hits;
    return hits;
}

RigidTransform node_transform(const Eigen::Vector3d& coords, bool rotation_stage,
                              const Eigen::Matrix3d& fixed_rotation) {
    if (rotation_stage) {
        PoseVector p{0.0, 0.0, 0.0, coords[0], coords[1], coords[2]};
        return pose_to_transform(p);
    }
    return {fixed_rotation, coords};
}

PoseVector node_pose(const Eigen::Vector3d& coords, bool rotation_stage) {
    if (rotation_stage) return {0.0, 0.0, 0.0, coords[0], coords[1], coords[2]};
    return {coords[0], coords[1], coords[2], 0.0, 0.0, 0.0};
}

struct StageOutcome {
    RigidTransform refined;
    RigidTransform node;
    double objective = kInf;
    bool any_ok = false;
};

StageOutcome run_pyramid_stage(const PointCloud& source, const KdTree& ref_index,
                               const PyramidConfig& cfg, const IcpConfig& icp, bool rotation_stage,
                               const Eigen::Matrix3d& fixed_rotation, PyramidStageCounts& counts,
                               std::vector<HistoryEntry>& history, int stage_tag) {
    Eigen::Vector3d lo, hi;
    for (int k = 0; k < 3; ++k) {
        int axis = rotation_stage ? 3 + k : k;
        lo[k] = cfg.bounds.lo[axis];
        hi[k] = cfg.bounds.hi[axis];
    }
    Eigen::Vector3d level1_cell = (hi - lo) / static_cast<double>(cfg.coarse_grid);

    std::vector<GridNode> pool;
    auto score = [&](const Eigen::Vector3d& coords, double cell_scale) {
        GridNode node{coords, 0, cell_scale, pool.size()};
        node.fitness =
            radius_fitness(source, ref_index, node_transform(coords, rotation_stage, fixed_rotation),
                           cfg.fitness_radius);
        pool.push_back(node);
    };

    // Level 1: full coarse grid of cell centers.
    counts.fitness_evaluations.clear();
    for (int i = 0; i < cfg.coarse_grid; ++i) {
        for (int j = 0; j < cfg.coarse_grid; ++j) {
            for (int k = 0; k < cfg.coarse_grid; ++k) {
                Eigen::Vector3d coords =
                    lo + Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5).cwiseProduct(level1_cell);
                score(coords, 1.0);
            }
        }
    }
    counts.fitness_evaluations.push_back(static_cast<long>(pool.size()));

    auto top_of = [&](std::size_t k) {
        std::vector<std::size_t> idx(pool.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::size_t keep = std::min(k, idx.size());
        std::partial_sort(idx.begin(), idx.begin() + keep, idx.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (pool[a].fitness != pool[b].fitness)
                                  return pool[a].fitness > pool[b].fitness;
                              return pool[a].order < pool[b].order;
                          });
        idx.resize(keep);
        return idx;
    };

    // Refinement levels: each survivor spawns a grid spanning half its cell
    // width on every axis.
    for (int level = 2; level <= cfg.levels; ++level) {
        auto parents = top_of(static_cast<std::size_t>(cfg.top_k));
        long before = static_cast<long>(pool.size());
        for (std::size_t pi : parents) {
            GridNode parent = pool[pi];
            Eigen::Vector3d parent_cell = parent.cell_width_scale * level1_cell;
            Eigen::Vector3d child_span = parent_cell / 2.0;
            Eigen::Vector3d child_cell = child_span * 2.0 / static_cast<double>(cfg.refine_grid);
            Eigen::Vector3d origin = parent.coords - child_span;
            double child_scale = parent.cell_width_scale / static_cast<double>(cfg.refine_grid);
            for (int i = 0; i < cfg.refine_grid; ++i) {
                for (int j = 0; j < cfg.refine_grid; ++j) {
                    for (int k = 0; k < cfg.refine_grid; ++k) {
                        Eigen::Vector3d coords =
                            origin +
                            Eigen::Vector3d(i + 0.5, j + 0.5, k + 0.5).cwiseProduct(child_cell);
                        coords = coords.cwiseMax(lo).cwiseMin(hi);
                        score(coords, child_scale);
                    }
                }
            }
        }
        counts.fitness_evaluations.push_back(static_cast<long>(pool.size()) - before);
    }

    // ICP on the final survivors.
    StageOutcome out;
    auto finalists = top_of(static_cast<std::size_t>(cfg.top_k));
    for (std::size_t pi : finalists) {
        const GridNode& node = pool[pi];
        RigidTransform t0 = node_transform(node.coords, rotation_stage, fixed_rotation);
        ++counts.icp_runs;
        double objective = kInf;
        RigidTransform refined = t0;
        try {
            IcpResult r = run_icp_indexed(source, ref_index, t0, icp);
            objective = r.objective;
            refined = r.transform;
        } catch (const NoOverlapError&) {
        } catch (const DegenerateGeometryError&) {
        }
        history.push_back({node_pose(node.coords, rotation_stage), objective, SampleSource::kGrid,
                           stage_tag});
        if (objective < out.objective) {
            out.objective = objective;
            out.refined = refined;
            out.node = t0;
            out.any_ok = true;
        }
    }
    return out;
}

}  // namespace

void PyramidConfig::validate() const {
    if (coarse_grid < 1 || refine_grid < 1 || top_k < 1)
        throw std::invalid_argument("PyramidConfig: grid sizes and top_k must be >= 1");
    if (levels < 1) throw std::invalid_argument("PyramidConfig: levels must be >= 1");
    if (!(fitness_radius > 0.0)) throw std::invalid_argument("PyramidConfig: fitness radius must be > 0");
    bounds.validate();
}

PyramidResult pyramid_search(const PointCloud& source, const PointCloud& reference,
                             const PyramidConfig& cfg, const IcpConfig& icp) {
    cfg.validate();
    icp.validate();
    if (source.size() < 3 || reference.size() < 3)
        throw std::invalid_argument("pyramid_search: both clouds need at least 3 points");

    auto start = std::chrono::steady_clock::now();
    KdTree ref_index(reference);
    PyramidResult out;
    std::vector<HistoryEntry> history;

    StageOutcome rot = run_pyramid_stage(source, ref_index, cfg, icp, /*rotation_stage=*/true,
                                         Eigen::Matrix3d::Identity(), out.stages[0], history, 1);
    if (!rot.any_ok)
        throw RegistrationFailedError("pyramid_search: every rotation candidate failed", history);

    StageOutcome trans = run_pyramid_stage(source, ref_index, cfg, icp, /*rotation_stage=*/false,
                                           rot.refined.rotation, out.stages[1], history, 2);
    if (!trans.any_ok)
        throw RegistrationFailedError("pyramid_search: every translation candidate failed", history);

    const StageOutcome& best = trans.objective <= rot.objective ? trans : rot;
    RegistrationResult& r = out.result;
    r.best_transform = best.refined;
    r.pre_polish_transform = best.node;
    r.best_objective = best.objective;
    r.polished_objective = best.objective;
    r.history = std::move(history);
    r.evaluations = static_cast<int>(r.history.size());
    {
        double sum = 0.0;
        for (const auto& p : source.points)
            sum += ref_index.nearest(r.best_transform.apply(p)).distance;
        r.mean_p2p = sum / static_cast<double>(source.size());
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

RegistrationResult random_search(const PointCloud& source, const PointCloud& reference, int budget,
                                 const SearchBounds& bounds, const IcpConfig& icp,
                                 std::uint64_t seed) {
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    bounds.validate();
    icp.validate();
    if (source.size() < 3 || reference.size() < 3)
        throw std::invalid_argument("random_search: both clouds need at least 3 points");

    auto start = std::chrono::steady_clock::now();
    KdTree ref_index(reference);
    UniformRng rng(seed);

    RegistrationResult result;
    double best_objective = kInf;
    RigidTransform best_refined;
    RigidTransform best_node;

    for (int i = 0; i < budget; ++i) {
        Vector6d v;
        for (int k = 0; k < 6; ++k) v[k] = rng.in(bounds.lo[k], bounds.hi[k]);
        PoseVector pose = PoseVector::from_vector(v);
        RigidTransform t0 = pose_to_transform(pose);
        double objective = kInf;
        RigidTransform refined = t0;
        try {
            IcpResult r = run_icp_indexed(source, ref_index, t0, icp);
            objective = r.objective;
            refined = r.transform;
        } catch (const NoOverlapError&) {
        } catch (const DegenerateGeometryError&) {
        }
        result.history.push_back({pose, objective, SampleSource::kRandom, 0});
        if (objective < best_objective) {
            best_objective = objective;
            best_refined = refined;
            best_node = t0;
        }
    }
    if (!std::isfinite(best_objective))
        throw RegistrationFailedError("random_search: every evaluation failed", result.history);

    result.pre_polish_transform = best_refined;
    result.best_objective = best_objective;
    try {
        IcpResult polished = run_icp_indexed(source, ref_index, best_refined, icp);
        result.best_transform = polished.transform;
        result.polished_objective = polished.objective;
    } catch (const NoOverlapError&) {
        result.best_transform = best_refined;
        result.polished_objective = best_objective;
    }
    result.evaluations = static_cast<int>(result.history.size());
    {
        double sum = 0.0;
        for (const auto& p : source.points)
            sum += ref_index.nearest(result.best_transform.apply(p)).distance;
        result.mean_p2p = sum / static_cast<double>(source.size());
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace boicp
