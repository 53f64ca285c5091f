#pragma once

#include <Eigen/Core>

namespace boicp {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// SE(3) element stored as rotation matrix plus translation vector.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

    RigidTransform compose(const RigidTransform& other) const {
        return {rotation * other.rotation, rotation * other.translation + translation};
    }

    RigidTransform inverse() const {
        Eigen::Matrix3d rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    Eigen::Matrix4d matrix() const;

    /// Rotation orthonormal and det = +1, both within 1e-9.
    bool valid() const;
};

/// Six-dimensional search variable [x, y, z, theta, psi, phi];
/// angles are roll, pitch, yaw in radians.
struct PoseVector {
    double x = 0.0, y = 0.0, z = 0.0;
    double theta = 0.0, psi = 0.0, phi = 0.0;

    Vector6d vector() const {
        Vector6d v;
        v << x, y, z, theta, psi, phi;
        return v;
    }

    static PoseVector from_vector(const Vector6d& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

    bool finite() const;
};

/// Per-axis box for the six pose dimensions.
struct SearchBounds {
    Vector6d lo;
    Vector6d hi;

    /// Translation x in [-4,4], y in [-2,2], z in [-1,1]; full rotation [-pi, pi].
    static SearchBounds default_bounds();

    /// Throws std::invalid_argument unless lo[i] < hi[i] for all axes and the
    /// rotation intervals are subsets of [-pi, pi].
    void validate() const;

    bool contains(const PoseVector& p, double slack = 0.0) const;
};

/// Builds the transform with rotation Rz(phi) * Ry(psi) * Rx(theta) and
/// translation (x, y, z). Throws std::invalid_argument on non-finite input.
RigidTransform pose_to_transform(const PoseVector& p);

/// Inverse of pose_to_transform. Throws DegeneratePoseError at gimbal lock
/// (|R(2,0)| >= 1 - 1e-9, i.e. pitch at +-pi/2).
PoseVector transform_to_pose(const RigidTransform& t);

/// Interprets p as an increment in a frame centered at base: base * pose_to_transform(p).
RigidTransform recenter_pose(const PoseVector& p, const RigidTransform& base);

/// Geodesic angle between the two rotations, in [0, pi].
double rotation_error(const RigidTransform& a, const RigidTransform& b);

/// Euclidean distance between the two translations.
double translation_error(const RigidTransform& a, const RigidTransform& b);

}  // namespace boicp
