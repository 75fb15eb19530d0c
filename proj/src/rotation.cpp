#include "mocap/rotation.h"

#include <algorithm>
#include <cmath>

namespace mocap {

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(), a.z(), 0.0, -a.x(), -a.y(), a.x(), 0.0;
  return m;
}

Mat3 axisAngleToMatrix(const Vec3& aa) {
  const double angle = aa.norm();
  if (angle < 1e-12) {
    const Mat3 k = skew(aa);
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  return Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix();
}

Mat3 axisAngleToMatrix(const Vec3& aa, std::array<Mat3, 3>& dR) {
  const double sq = aa.squaredNorm();
  if (sq < 1e-16) {
    // R ~ I + K + K^2/2, exact to second order
    const Mat3 k = skew(aa);
    for (int i = 0; i < 3; ++i) {
      const Mat3 ei = skew(Vec3::Unit(i));
      dR[i] = ei + 0.5 * (ei * k + k * ei);
    }
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const Mat3 R = axisAngleToMatrix(aa);
  const Mat3 k = skew(aa);
  const Mat3 iMinusR = Mat3::Identity() - R;
  for (int i = 0; i < 3; ++i) {
    const Vec3 col = aa.cross(iMinusR.col(i));
    dR[i] = (aa[i] * k + skew(col)) * R / sq;
  }
  return R;
}

Vec3 matrixToAxisAngle(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.axis() * aa.angle();
}

Mat3 axisRotation(const Vec3& unitAxis, double angle) {
  return Eigen::AngleAxisd(angle, unitAxis).toRotationMatrix();
}

Vec3 slerpAxisAngle(const Vec3& a, const Vec3& b, double u) {
  const Eigen::Quaterniond qa(axisAngleToMatrix(a));
  const Eigen::Quaterniond qb(axisAngleToMatrix(b));
  const Eigen::Quaterniond q = qa.slerp(u, qb);
  const Eigen::AngleAxisd out(q);
  return out.axis() * out.angle();
}

double rotationAngleBetween(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(0.5 * ((a.transpose() * b).trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

} // namespace mocap
