#pragma once

#include <filesystem>
#include <vector>

#include "boicp/geometry.hpp"

namespace boicp {

enum class PoseFormat {
    kKitti12,  // rows of 12 reals, row-major 3x4 [R|t]
    kTum8,     // timestamp tx ty tz qx qy qz qw
};

/// Parses a pose file in order. Rotations are checked orthonormal within
/// 1e-4 before being projected exactly; TUM quaternions must be unit within
/// 1e-3 and are normalized. Throws ParseError with the offending line number.
std::vector<RigidTransform> load_poses(const std::filesystem::path& path, PoseFormat format);

/// Detects the format from the column count of the first data row.
std::vector<RigidTransform> load_poses(const std::filesystem::path& path);

}  // namespace boicp
