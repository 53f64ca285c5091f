#include "boicp/geometry.hpp"

#include <cmath>

#include <Eigen/LU>
#include <stdexcept>

#include "boicp/errors.hpp"

namespace boicp {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kOrthoTol = 1e-9;
}  // namespace

Eigen::Matrix4d RigidTransform::matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

bool RigidTransform::valid() const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    Eigen::Matrix3d rtr = rotation.transpose() * rotation;
    if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kOrthoTol) return false;
    return std::abs(rotation.determinant() - 1.0) <= kOrthoTol;
}

bool PoseVector::finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) && std::isfinite(theta) &&
           std::isfinite(psi) && std::isfinite(phi);
}

SearchBounds SearchBounds::default_bounds() {
    SearchBounds b;
    b.lo << -4.0, -2.0, -1.0, -kPi, -kPi, -kPi;
    b.hi << 4.0, 2.0, 1.0, kPi, kPi, kPi;
    return b;
}

void SearchBounds::validate() const {
    for (int i = 0; i < 6; ++i) {
        if (!(lo[i] < hi[i])) throw std::invalid_argument("search bounds: lo must be < hi on every axis");
    }
    for (int i = 3; i < 6; ++i) {
        if (lo[i] < -kPi - 1e-12 || hi[i] > kPi + 1e-12)
            throw std::invalid_argument("search bounds: rotation intervals must lie within [-pi, pi]");
    }
}

bool SearchBounds::contains(const PoseVector& p, double slack) const {
    Vector6d v = p.vector();
    for (int i = 0; i < 6; ++i) {
        if (v[i] < lo[i] - slack || v[i] > hi[i] + slack) return false;
    }
    return true;
}

RigidTransform pose_to_transform(const PoseVector& p) {
    if (!p.finite()) throw std::invalid_argument("pose_to_transform: non-finite pose entry");
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double cp = std::cos(p.psi), sp = std::sin(p.psi);
    const double cf = std::cos(p.phi), sf = std::sin(p.phi);
    // Rz(phi) * Ry(psi) * Rx(theta), written out.
    Eigen::Matrix3d r;
    r << cf * cp, cf * sp * st - sf * ct, cf * sp * ct + sf * st,  //
        sf * cp, sf * sp * st + cf * ct, sf * sp * ct - cf * st,   //
        -sp, cp * st, cp * ct;
    return {r, Eigen::Vector3d(p.x, p.y, p.z)};
}

PoseVector transform_to_pose(const RigidTransform& t) {
    const Eigen::Matrix3d& r = t.rotation;
    if (std::abs(r(2, 0)) >= 1.0 - 1e-9)
        throw DegeneratePoseError("transform_to_pose: pitch at +-pi/2, Euler angles degenerate");
    PoseVector p;
    p.x = t.translation[0];
    p.y = t.translation[1];
    p.z = t.translation[2];
    p.psi = std::asin(-r(2, 0));
    p.theta = std::atan2(r(2, 1), r(2, 2));
    p.phi = std::atan2(r(1, 0), r(0, 0));
    return p;
}

RigidTransform recenter_pose(const PoseVector& p, const RigidTransform& base) {
    return base.compose(pose_to_transform(p));
}

double rotation_error(const RigidTransform& a, const RigidTransform& b) {
    double c = ((a.rotation * b.rotation.transpose()).trace() - 1.0) / 2.0;
    c = std::min(1.0, std::max(-1.0, c));
    return std::acos(c);
}

double translation_error(const RigidTransform& a, const RigidTransform& b) {
    return (a.translation - b.translation).norm();
}

}  // namespace boicp
