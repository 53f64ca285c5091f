#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "boicp/geometry.hpp"
#include "boicp/icp.hpp"
#include "boicp/optimizer.hpp"
#include "boicp/point_cloud.hpp"

namespace boicp {

struct PyramidConfig {
    int coarse_grid = 12;  // per-axis node count at level 1
    int refine_grid = 6;   // per-axis node count for refinement grids
    int top_k = 10;        // survivors per level; also the ICP pool size
    int levels = 3;
    SearchBounds bounds = SearchBounds::default_bounds();
    /// Fitness = number of source points with a reference neighbor within
    /// this radius; callers typically use twice their voxel size.
    double fitness_radius = 1.4;

    void validate() const;
};

struct PyramidStageCounts {
    std::vector<long> fitness_evaluations;  // one entry per level
    int icp_runs = 0;

    long total_fitness() const {
        long t = 0;
        for (long v : fitness_evaluations) t += v;
        return t;
    }
};

struct PyramidResult {
    RegistrationResult result;
    std::array<PyramidStageCounts, 2> stages;  // [0] rotation, [1] translation
};

/// Nested coarse-to-fine grid search: rotation stage then translation stage.
/// Each level scores grid nodes by radius fitness, keeps the top_k, and
/// refines around each with a grid spanning half the previous cell width;
/// after the last level the top_k nodes are polished with ICP and the best
/// is returned. Clouds are used as given (downsample beforehand if wanted).
PyramidResult pyramid_search(const PointCloud& source, const PointCloud& reference,
                             const PyramidConfig& cfg, const IcpConfig& icp);

/// Uniform-random control: budget poses drawn from the seeded stream, each
/// scored by the ICP objective; the best is polished and returned. A longer
/// run shares its pose-stream prefix with a shorter run at the same seed.
RegistrationResult random_search(const PointCloud& source, const PointCloud& reference, int budget,
                                 const SearchBounds& bounds, const IcpConfig& icp,
                                 std::uint64_t seed);

}  // namespace boicp
