#pragma once

#include <filesystem>
#include <string>

#include "boicp/point_cloud.hpp"

namespace boicp {

enum class CloudFormat { kPly, kPcd, kXyz, kKittiBin };

/// Maps .ply/.pcd/.xyz/.bin to a format. Throws std::invalid_argument for
/// anything else.
CloudFormat infer_cloud_format(const std::filesystem::path& path);

/// Reads a point cloud. PLY: ascii and binary-little-endian, float or double
/// x/y/z vertex properties, other properties and elements skipped. PCD: ascii
/// and binary with x y z among FIELDS. XYZ: one whitespace-separated triple
/// per line, blank lines and '#' comments allowed. kitti-bin: packed float32
/// (x, y, z, reflectance) records, reflectance dropped. Throws ParseError
/// (with a byte offset or line number) on malformed input or zero points.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format);

/// load_cloud with the format inferred from the extension.
PointCloud load_cloud(const std::filesystem::path& path);

/// Writes a cloud: PLY and PCD as binary little-endian float32, XYZ as full
/// precision text, kitti-bin as float32 with zero reflectance.
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);

}  // namespace boicp
