#include "boicp/result_json.hpp"

#include <cmath>

namespace boicp {

nlohmann::json transform_to_json(const RigidTransform& t) {
    nlohmann::json rows = nlohmann::json::array();
    Eigen::Matrix4d m = t.matrix();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) rows.push_back(m(r, c));
    return rows;
}

RigidTransform transform_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 16)
        throw std::invalid_argument("transform_from_json: expected 16 row-major entries");
    Eigen::Matrix4d m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m(r, c) = j[r * 4 + c].get<double>();
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

nlohmann::json result_to_json(const RegistrationResult& result, const std::string& method,
                              const BoConfig& cfg) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["method"] = method;
    j["seed"] = cfg.seed;

    nlohmann::json config;
    config["n_random"] = cfg.n_random;
    config["n_iterations"] = cfg.n_iterations;
    config["voxel"] = cfg.voxel;
    config["mode"] = cfg.mode == BoMode::kFull6Dof ? "full" : "nested";
    config["bounds_lo"] = std::vector<double>(cfg.bounds.lo.data(), cfg.bounds.lo.data() + 6);
    config["bounds_hi"] = std::vector<double>(cfg.bounds.hi.data(), cfg.bounds.hi.data() + 6);
    j["config"] = config;

    j["best_transform"] = transform_to_json(result.best_transform);
    j["pre_polish_transform"] = transform_to_json(result.pre_polish_transform);
    j["best_objective"] = result.best_objective;
    j["polished_objective"] = result.polished_objective;
    j["mean_p2p"] = result.mean_p2p;
    j["evaluations"] = result.evaluations;
    j["acquisition_fallbacks"] = result.acquisition_fallbacks;
    j["runtime_s"] = result.wall_time_s;

    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : result.history) {
        nlohmann::json entry;
        entry["stage"] = e.stage;
        switch (e.source) {
            case SampleSource::kRandom: entry["source"] = "random"; break;
            case SampleSource::kAcquired: entry["source"] = "acquired"; break;
            case SampleSource::kGrid: entry["source"] = "grid"; break;
        }
        Vector6d v = e.pose.vector();
        entry["pose"] = std::vector<double>(v.data(), v.data() + 6);
        if (std::isfinite(e.objective))
            entry["objective"] = e.objective;
        else
            entry["objective"] = nullptr;
        history.push_back(entry);
    }
    j["history"] = history;
    return j;
}

}  // namespace boicp
