#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace pushkit {

/// Unit quaternion with non-negative scalar part representing the same
/// rotation as q.
inline Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

/// 3D pose: position plus unit quaternion orientation.
struct Pose {
  Eigen::Vector3d p{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond q{Eigen::Quaterniond::Identity()};

  Pose() = default;
  Pose(const Eigen::Vector3d& pos, const Eigen::Quaterniond& rot)
      : p(pos), q(canonical(rot)) {}

  static Pose identity() { return Pose{}; }
};

/// Rigid body transform moving a frame at time t into the frame at t+1,
/// expressed in the body frame of the moving frame itself.
struct RigidMotion {
  Eigen::Vector3d p{Eigen::Vector3d::Zero()};
  Eigen::Quaterniond q{Eigen::Quaterniond::Identity()};

  RigidMotion() = default;
  RigidMotion(const Eigen::Vector3d& trans, const Eigen::Quaterniond& rot)
      : p(trans), q(canonical(rot)) {}

  static RigidMotion identity() { return RigidMotion{}; }
};

inline Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.p + a.q * b.p, a.q * b.q);
}

/// v^-1 = (-q^-1 p, q^-1)
inline Pose inverse(const Pose& v) {
  Eigen::Quaterniond qi = v.q.conjugate();
  return Pose(-(qi * v.p), qi);
}

/// Relative pose h = v^-1 o b of frame b expressed in frame v.
inline Pose relative_pose(const Pose& v, const Pose& b) {
  return compose(inverse(v), b);
}

/// Body-frame motion m with x_{t+1} = x_t o m.
inline RigidMotion motion_between(const Pose& x_t, const Pose& x_t1) {
  Pose m = compose(inverse(x_t), x_t1);
  return RigidMotion(m.p, m.q);
}

inline Pose apply_motion(const Pose& x, const RigidMotion& m) {
  return compose(x, Pose(m.p, m.q));
}

/// Object motion m_b = h^-1 o m_v o h for a contact frame with fixed
/// relative pose h = v^-1 o b to the object frame.
inline RigidMotion local_to_object_motion(const RigidMotion& m_v,
                                          const Pose& h) {
  Pose m = compose(compose(inverse(h), Pose(m_v.p, m_v.q)), h);
  return RigidMotion(m.p, m.q);
}

/// Inverse map: local motion m_v = h o m_b o h^-1.
inline RigidMotion object_to_local_motion(const RigidMotion& m_b,
                                          const Pose& h) {
  Pose m = compose(compose(h, Pose(m_b.p, m_b.q)), inverse(h));
  return RigidMotion(m.p, m.q);
}

/// Rotation angle in radians, antipodal-invariant, in [0, pi].
inline double rotation_angle(const Eigen::Quaterniond& q) {
  double w = std::min(1.0, std::abs(q.normalized().w()));
  return 2.0 * std::acos(w);
}

/// Distance between two orientations as the relative rotation angle.
inline double orientation_distance(const Eigen::Quaterniond& a,
                                   const Eigen::Quaterniond& b) {
  return rotation_angle(a.conjugate() * b);
}

inline double pose_translation_distance(const Pose& a, const Pose& b) {
  return (a.p - b.p).norm();
}

}  // namespace pushkit
