#include "boicp/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "boicp/errors.hpp"
#include "boicp/gp.hpp"

namespace boicp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Downsampled clouds plus the prebuilt reference index, shared across all
/// objective evaluations of one run.
class Evaluator {
public:
    Evaluator(const PointCloud& source, const PointCloud& reference, double voxel,
              const IcpConfig& icp)
        : source_(voxel > 0.0 ? voxel_downsample(source, voxel) : source),
          reference_(voxel > 0.0 ? voxel_downsample(reference, voxel) : reference),
          index_(reference_),
          icp_(icp) {
        if (source_.size() < 3 || reference_.size() < 3)
            throw std::invalid_argument("optimize: clouds need >= 3 points after downsampling");
    }

    struct Outcome {
        double objective = kInf;
        RigidTransform refined;
        bool ok = false;
    };

    Outcome evaluate(const RigidTransform& t0) const {
        try {
            IcpResult r = run_icp_indexed(source_, index_, t0, icp_);
            return {r.objective, r.transform, true};
        } catch (const NoOverlapError&) {
            return {kInf, t0, false};
        } catch (const DegenerateGeometryError&) {
            return {kInf, t0, false};
        }
    }

    IcpResult polish(const RigidTransform& t0, const IcpConfig& cfg) const {
        return run_icp_indexed(source_, index_, t0, cfg);
    }

    double mean_p2p(const RigidTransform& t) const {
        double sum = 0.0;
        for (const auto& p : source_.points) sum += index_.nearest(t.apply(p)).distance;
        return sum / static_cast<double>(source_.size());
    }

private:
    PointCloud source_;
    PointCloud reference_;
    KdTree index_;
    IcpConfig icp_;
};

/// One BO stage over a subset of the six pose axes. Inactive translation /
/// rotation blocks are pinned to the supplied fixed parts.
struct StageSpec {
    std::vector<int> axes;
    Eigen::Matrix3d fixed_rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d fixed_translation = Eigen::Vector3d::Zero();
    int stage_tag = 0;
    bool recenter = false;  // rotation stage: re-express samples around the best seed
};

struct StageBest {
    PoseVector pose;
    double objective = kInf;
    RigidTransform transform;  // assembled decision transform
    RigidTransform refined;    // after per-evaluation ICP
};

bool has_axis(const std::vector<int>& axes, int a) {
    return std::find(axes.begin(), axes.end(), a) != axes.end();
}

RigidTransform assemble(const StageSpec& spec, const PoseVector& pose,
                        const std::optional<RigidTransform>& recenter_base) {
    RigidTransform t = pose_to_transform(pose);
    if (!has_axis(spec.axes, 3)) t.rotation = spec.fixed_rotation;
    if (!has_axis(spec.axes, 0)) t.translation = spec.fixed_translation;
    if (recenter_base) t = recenter_base->compose(t);
    return t;
}

class StageRunner {
public:
    StageRunner(const Evaluator& eval, const SearchBounds& bounds, const BoConfig& cfg,
                UniformRng& rng, std::vector<HistoryEntry>& history, int& fallbacks)
        : eval_(eval), bounds_(bounds), cfg_(cfg), rng_(rng), history_(history),
          fallbacks_(fallbacks) {}

    StageBest run(const StageSpec& spec) {
        recenter_base_.reset();
        const int d = static_cast<int>(spec.axes.size());
        Eigen::VectorXd lo(d), hi(d);
        for (int k = 0; k < d; ++k) {
            lo[k] = bounds_.lo[spec.axes[k]];
            hi[k] = bounds_.hi[spec.axes[k]];
        }

        StageBest best;
        std::vector<Eigen::VectorXd> xs;
        std::vector<double> ys;

        auto record = [&](const PoseVector& pose, SampleSource source) -> double {
            RigidTransform t0 = assemble(spec, pose, recenter_base_);
            auto outcome = eval_.evaluate(t0);
            history_.push_back({pose, outcome.objective, source, spec.stage_tag});
            if (outcome.ok && outcome.objective < best.objective) {
                best.pose = pose;
                best.objective = outcome.objective;
                best.transform = t0;
                best.refined = outcome.refined;
            }
            return outcome.objective;
        };

        // Random seeding.
        for (int i = 0; i < cfg_.n_random; ++i) {
            PoseVector pose;
            Vector6d v = Vector6d::Zero();
            for (int k = 0; k < d; ++k) v[spec.axes[k]] = rng_.in(lo[k], hi[k]);
            pose = PoseVector::from_vector(v);
            double y = record(pose, SampleSource::kRandom);
            if (std::isfinite(y)) {
                xs.push_back(normalize_active(pose, spec.axes, lo, hi));
                ys.push_back(y);
            }
        }
        if (!std::isfinite(best.objective))
            throw RegistrationFailedError("optimize: every seed evaluation failed", history_);

        if (cfg_.n_iterations == 0) return best;

        if (spec.recenter) rebase(spec, best, xs, ys, lo, hi);

        GpModel gp = GpModel::fit(stack(xs, d), Eigen::Map<Eigen::VectorXd>(ys.data(), ys.size()),
                                  Kernel::defaults(d), cfg_.gp_noise);

        for (int i = 0; i < cfg_.n_iterations; ++i) {
            auto acq = argmax_ei_normalized(gp, best.objective, cfg_.acq, rng_);
            if (acq.mean_fallback) ++fallbacks_;
            Vector6d v = Vector6d::Zero();
            for (int k = 0; k < d; ++k) v[spec.axes[k]] = lo[k] + acq.point[k] * (hi[k] - lo[k]);
            PoseVector pose = PoseVector::from_vector(v);
            double y = record(pose, SampleSource::kAcquired);
            if (std::isfinite(y)) gp = gp.update(acq.point, y);
        }
        return best;
    }

private:
    static Eigen::VectorXd normalize_active(const PoseVector& pose, const std::vector<int>& axes,
                                            const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd u(axes.size());
        Vector6d v = pose.vector();
        for (int k = 0; k < static_cast<int>(axes.size()); ++k)
            u[k] = (v[axes[k]] - lo[k]) / (hi[k] - lo[k]);
        return u;
    }

    static Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& xs, int d) {
        Eigen::MatrixXd m(xs.size(), d);
        for (int i = 0; i < static_cast<int>(xs.size()); ++i) m.row(i) = xs[i].transpose();
        return m;
    }

    /// Re-express the seed samples as increments around the best seed, so the
    /// acquisition loop searches a frame centered there. Samples that cannot
    /// be re-expressed (gimbal lock, out of bounds) are dropped from the
    /// surrogate; the best seed itself always survives as the zero increment.
    void rebase(const StageSpec& spec, StageBest& best, std::vector<Eigen::VectorXd>& xs,
                std::vector<double>& ys, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        RigidTransform base = best.transform;
        std::vector<Eigen::VectorXd> xs2;
        std::vector<double> ys2;
        // Walk the finite seed entries in history order to recover their poses.
        std::size_t xi = 0;
        for (std::size_t h = history_.size() - cfg_.n_random; h < history_.size(); ++h) {
            const HistoryEntry& e = history_[h];
            if (!std::isfinite(e.objective)) continue;
            RigidTransform t = assemble(spec, e.pose, std::nullopt);
            PoseVector inc;
            try {
                inc = transform_to_pose(base.inverse().compose(t));
            } catch (const DegeneratePoseError&) {
                ++xi;
                continue;
            }
            Vector6d v = inc.vector();
            bool inside = true;
            Eigen::VectorXd u(spec.axes.size());
            for (int k = 0; k < static_cast<int>(spec.axes.size()); ++k) {
                double c = v[spec.axes[k]];
                if (c < lo[k] || c > hi[k]) inside = false;
                u[k] = (c - lo[k]) / (hi[k] - lo[k]);
            }
            if (inside) {
                xs2.push_back(u);
                ys2.push_back(ys[xi]);
            }
            ++xi;
        }
        if (xs2.empty()) return;  // bounds exclude the zero increment: keep the raw frame
        xs = std::move(xs2);
        ys = std::move(ys2);
        recenter_base_ = base;
        best.pose = PoseVector{};  // zero increment reproduces the base
    }

    const Evaluator& eval_;
    const SearchBounds& bounds_;
    const BoConfig& cfg_;
    UniformRng& rng_;
    std::vector<HistoryEntry>& history_;
    int& fallbacks_;
    std::optional<RigidTransform> recenter_base_;
};

RegistrationResult finalize(const Evaluator& eval, const BoConfig& cfg, StageBest global_best,
                            std::vector<HistoryEntry> history, int fallbacks,
                            std::chrono::steady_clock::time_point start) {
    RegistrationResult result;
    result.pre_polish_transform = global_best.refined;
    result.best_objective = global_best.objective;
    result.history = std::move(history);
    result.evaluations = static_cast<int>(result.history.size());
    result.acquisition_fallbacks = fallbacks;

    try {
        IcpResult polished = eval.polish(global_best.refined, cfg.polish);
        result.best_transform = polished.transform;
        result.polished_objective = polished.objective;
    } catch (const NoOverlapError&) {
        result.best_transform = global_best.refined;
        result.polished_objective = global_best.objective;
    }
    result.mean_p2p = eval.mean_p2p(result.best_transform);
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

}  // namespace

void BoConfig::validate() const {
    if (n_random < 1) throw std::invalid_argument("BoConfig: n_random must be >= 1");
    if (n_iterations < 0) throw std::invalid_argument("BoConfig: n_iterations must be >= 0");
    if (voxel < 0.0) throw std::invalid_argument("BoConfig: voxel must be >= 0");
    if (!(gp_noise > 0.0)) throw std::invalid_argument("BoConfig: gp_noise must be > 0");
    bounds.validate();
    icp.validate();
    polish.validate();
    acq.validate();
}

BoConfig preset(const std::string& name) {
    BoConfig cfg;
    if (name == "A") {
        cfg.n_random = 10;
        cfg.n_iterations = 20;
        cfg.voxel = 0.7;
    } else if (name == "B") {
        cfg.n_random = 20;
        cfg.n_iterations = 35;
        cfg.voxel = 0.7;
    } else if (name == "C") {
        cfg.n_random = 30;
        cfg.n_iterations = 60;
        cfg.voxel = 0.6;
    } else {
        throw std::invalid_argument("preset: unknown configuration '" + name + "'");
    }
    return cfg;
}

std::vector<PoseVector> seed_samples(const SearchBounds& bounds, int n, UniformRng& rng) {
    if (n < 1) throw std::invalid_argument("seed_samples: n must be >= 1");
    bounds.validate();
    std::vector<PoseVector> poses;
    poses.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vector6d v;
        for (int k = 0; k < 6; ++k) v[k] = rng.in(bounds.lo[k], bounds.hi[k]);
        poses.push_back(PoseVector::from_vector(v));
    }
    return poses;
}

RegistrationResult optimize_full(const PointCloud& source, const PointCloud& reference,
                                 const BoConfig& cfg) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();
    Evaluator eval(source, reference, cfg.voxel, cfg.icp);
    UniformRng rng(cfg.seed);
    std::vector<HistoryEntry> history;
    int fallbacks = 0;

    StageRunner runner(eval, cfg.bounds, cfg, rng, history, fallbacks);
    StageSpec spec;
    spec.axes = {0, 1, 2, 3, 4, 5};
    StageBest best = runner.run(spec);

    return finalize(eval, cfg, best, std::move(history), fallbacks, start);
}

RegistrationResult optimize_nested(const PointCloud& source, const PointCloud& reference,
                                   const BoConfig& cfg) {
    cfg.validate();
    auto start = std::chrono::steady_clock::now();
    Evaluator eval(source, reference, cfg.voxel, cfg.icp);
    UniformRng rng(cfg.seed);
    std::vector<HistoryEntry> history;
    int fallbacks = 0;

    StageRunner runner(eval, cfg.bounds, cfg, rng, history, fallbacks);

    StageSpec rotation;
    rotation.axes = {3, 4, 5};
    rotation.stage_tag = 1;
    rotation.recenter = cfg.recenter_rotation;
    StageBest rot_best = runner.run(rotation);

    StageSpec translation;
    translation.axes = {0, 1, 2};
    translation.fixed_rotation = rot_best.transform.rotation;
    translation.stage_tag = 2;
    StageBest trans_best = runner.run(translation);

    StageBest global = trans_best.objective <= rot_best.objective ? trans_best : rot_best;
    return finalize(eval, cfg, global, std::move(history), fallbacks, start);
}

RegistrationResult optimize(const PointCloud& source, const PointCloud& reference,
                            const BoConfig& cfg) {
    return cfg.mode == BoMode::kFull6Dof ? optimize_full(source, reference, cfg)
                                         : optimize_nested(source, reference, cfg);
}

}  // namespace boicp
