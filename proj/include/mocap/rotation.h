#pragma once

#include <array>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mocap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Skew-symmetric cross-product matrix, skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

/// Rodrigues map from an axis-angle vector (radians) to a rotation matrix.
Mat3 axisAngleToMatrix(const Vec3& aa);

/// Rotation matrix plus its three partial derivatives dR/daa_i.
///
/// Away from the origin the closed form
///   dR/dv_i = (v_i [v]x + [v x (I - R) e_i]x) / |v|^2 * R
/// is used; near zero a second-order series is used instead.
Mat3 axisAngleToMatrix(const Vec3& aa, std::array<Mat3, 3>& dR);

/// Inverse Rodrigues map; returns an angle in [0, pi].
Vec3 matrixToAxisAngle(const Mat3& R);

/// Rotation about a unit axis by `angle` radians.
Mat3 axisRotation(const Vec3& unitAxis, double angle);

/// Spherical linear interpolation of two axis-angle rotations, u in [0, 1].
Vec3 slerpAxisAngle(const Vec3& a, const Vec3& b, double u);

/// Geodesic angle between two rotations, radians.
double rotationAngleBetween(const Mat3& a, const Mat3& b);

/// Frobenius inner product, sum_ij a_ij * b_ij.
inline double frobeniusDot(const Mat3& a, const Mat3& b) {
  return a.cwiseProduct(b).sum();
}

} // namespace mocap
