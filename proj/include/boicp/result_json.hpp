#pragma once

#include <string>

#include <json.hpp>

#include "boicp/optimizer.hpp"

namespace boicp {

/// Versioned JSON form of a registration result; transforms are row-major
/// 4x4 homogeneous matrices, failed evaluations carry a null objective.
nlohmann::json result_to_json(const RegistrationResult& result, const std::string& method,
                              const BoConfig& cfg);

nlohmann::json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const nlohmann::json& j);

}  // namespace boicp
