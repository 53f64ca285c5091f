#include "boicp/pose_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "boicp/errors.hpp"

namespace boicp {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& what) {
    throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
}

/// Checks near-orthonormality within tol, then projects to the nearest
/// rotation so downstream invariants hold exactly.
Eigen::Matrix3d checked_rotation(const Eigen::Matrix3d& r, const std::filesystem::path& path,
                                 std::size_t line_no, double tol) {
    Eigen::Matrix3d err = r.transpose() * r - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol || r.determinant() < 0.0)
        fail(path, line_no, "rotation not orthonormal within tolerance");
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d u = svd.matrixU();
    Eigen::Matrix3d v = svd.matrixV();
    Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
    return u * d.asDiagonal() * v.transpose();
}

std::vector<std::vector<double>> read_rows(const std::filesystem::path& path,
                                           std::vector<std::size_t>& line_numbers) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open file");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.size() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> values;
        double v;
        while (ls >> v) values.push_back(v);
        if (!ls.eof()) fail(path, line_no, "non-numeric token");
        rows.push_back(std::move(values));
        line_numbers.push_back(line_no);
    }
    if (rows.empty()) throw ParseError(path.string() + ": no pose rows");
    return rows;
}

RigidTransform parse_kitti_row(const std::vector<double>& v, const std::filesystem::path& path,
                               std::size_t line_no) {
    if (v.size() != 12)
        fail(path, line_no, "expected 12 columns, got " + std::to_string(v.size()));
    Eigen::Matrix3d r;
    r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    RigidTransform t;
    t.rotation = checked_rotation(r, path, line_no, 1e-4);
    t.translation = Eigen::Vector3d(v[3], v[7], v[11]);
    return t;
}

RigidTransform parse_tum_row(const std::vector<double>& v, const std::filesystem::path& path,
                             std::size_t line_no) {
    if (v.size() != 8)
        fail(path, line_no, "expected 8 columns, got " + std::to_string(v.size()));
    double qx = v[4], qy = v[5], qz = v[6], qw = v[7];
    double norm = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
    if (std::abs(norm - 1.0) > 1e-3) fail(path, line_no, "quaternion not unit within 1e-3");
    qx /= norm;
    qy /= norm;
    qz /= norm;
    qw /= norm;
    Eigen::Matrix3d r;
    r << 1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
        2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
        2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy);
    RigidTransform t;
    t.rotation = checked_rotation(r, path, line_no, 1e-4);
    t.translation = Eigen::Vector3d(v[1], v[2], v[3]);
    return t;
}

}  // namespace

std::vector<RigidTransform> load_poses(const std::filesystem::path& path, PoseFormat format) {
    std::vector<std::size_t> line_numbers;
    auto rows = read_rows(path, line_numbers);
    std::vector<RigidTransform> poses;
    poses.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        poses.push_back(format == PoseFormat::kKitti12
                            ? parse_kitti_row(rows[i], path, line_numbers[i])
                            : parse_tum_row(rows[i], path, line_numbers[i]));
    }
    return poses;
}

std::vector<RigidTransform> load_poses(const std::filesystem::path& path) {
    std::vector<std::size_t> line_numbers;
    auto rows = read_rows(path, line_numbers);
    if (rows[0].size() == 12) return load_poses(path, PoseFormat::kKitti12);
    if (rows[0].size() == 8) return load_poses(path, PoseFormat::kTum8);
    throw ParseError(path.string() + ": line " + std::to_string(line_numbers[0]) +
                     ": cannot detect pose format from " + std::to_string(rows[0].size()) +
                     " columns");
}

}  // namespace boicp
