#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "boicp/acquisition.hpp"
#include "boicp/geometry.hpp"
#include "boicp/icp.hpp"
#include "boicp/point_cloud.hpp"
#include "boicp/rng.hpp"

namespace boicp {

enum class BoMode { kFull6Dof, kNested };

enum class SampleSource { kRandom, kAcquired, kGrid };

struct BoConfig {
    int n_random = 20;      // random poses used to seed the surrogate
    int n_iterations = 35;  // acquisition-driven evaluations
    SearchBounds bounds = SearchBounds::default_bounds();
    double voxel = 0.7;     // meters; 0 disables downsampling
    BoMode mode = BoMode::kNested;
    std::uint64_t seed = 0;
    IcpConfig icp;          // per-evaluation ICP depth
    IcpConfig polish;       // final refinement from the best transform
    AcquisitionConfig acq;
    double gp_noise = 1e-6;
    /// Nested rotation stage only: rebuild the surrogate around the best
    /// random sample so acquisition proposes increments from that frame.
    bool recenter_rotation = false;

    void validate() const;
};

/// Published testing configurations: A = (10, 20, 0.7), B = (20, 35, 0.7),
/// C = (30, 60, 0.6), all with the default bounds and nested mode.
/// Throws std::invalid_argument for an unknown name.
BoConfig preset(const std::string& name);

struct HistoryEntry {
    PoseVector pose;     // the decision variable that was evaluated
    double objective;    // +infinity when the evaluation found no overlap
    SampleSource source;
    int stage;           // 0 = single stage, 1 = rotation, 2 = translation
};

struct RegistrationResult {
    RigidTransform best_transform;       // after the final ICP polish
    double best_objective = 0.0;         // min over history (pre-polish)
    RigidTransform pre_polish_transform;
    double polished_objective = 0.0;
    double mean_p2p = 0.0;               // at best_transform
    std::vector<HistoryEntry> history;
    int evaluations = 0;
    double wall_time_s = 0.0;
    int acquisition_fallbacks = 0;
};

/// Every evaluated pose failed; the sample trace rode along for diagnosis.
class RegistrationFailedError : public std::runtime_error {
public:
    RegistrationFailedError(const std::string& what, std::vector<HistoryEntry> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<HistoryEntry>& history() const { return history_; }

private:
    std::vector<HistoryEntry> history_;
};

/// n poses drawn i.i.d. uniform per dimension within the bounds,
/// pose-major then axis order [x, y, z, theta, psi, phi].
std::vector<PoseVector> seed_samples(const SearchBounds& bounds, int n, UniformRng& rng);

/// Full 6DOF search: seed the surrogate with n_random poses, then run
/// n_iterations rounds of acquisition, evaluation, and surrogate update;
/// finish with an ICP polish from the best transform found.
RegistrationResult optimize_full(const PointCloud& source, const PointCloud& reference,
                                 const BoConfig& cfg);

/// Two-stage variant: rotation search with identity translation, then
/// translation search with the best rotation held fixed. Each stage gets
/// the (n_random, n_iterations) budget.
RegistrationResult optimize_nested(const PointCloud& source, const PointCloud& reference,
                                   const BoConfig& cfg);

/// Dispatches on cfg.mode.
RegistrationResult optimize(const PointCloud& source, const PointCloud& reference,
                            const BoConfig& cfg);

}  // namespace boicp
