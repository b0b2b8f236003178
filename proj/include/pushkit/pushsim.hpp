#pragma once

#include <string>
#include <vector>

#include "pushkit/cloud.hpp"
#include "pushkit/density.hpp"
#include "pushkit/geom.hpp"

namespace pushkit {

enum class ShapeKind {
  Cube,
  Cuboid,
  TriangularPrism,
  RoundedPrism,
  Cylinder,
  Box,
};

ShapeKind shape_kind_from_name(const std::string& name);
const char* shape_kind_name(ShapeKind kind);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Cube;
  // Cube: dims[0] = side. Cuboid/Box: dims = (lx, ly, lz).
  // TriangularPrism: dims = (side, height). RoundedPrism: (side, height,
  // fillet radius). Cylinder: (radius, height).
  std::vector<double> dims{0.2};
  double mass = 0.5;
  double sampling_density = 2e4;  // points / m^2

  void validate() const;
};

/// Sampled surface model in the object frame (origin at the centre of
/// mass, z up, resting bottom at z = -height/2).
struct ShapeModel {
  ShapeSpec spec;
  PointCloud cloud;  // walls + top, object frame
  std::vector<Eigen::Vector2d> footprint;       // support polygon, CCW
  std::vector<Eigen::Vector2d> analytic_curvature;  // per cloud point
  std::vector<Eigen::Vector3d> analytic_normal;     // per cloud point, outward
  double height = 0.0;
  double char_radius = 0.0;  // limit-surface torque radius c
};

struct SimConfig {
  double friction_min = 0.15;
  double friction_max = 0.35;
  double timestep = 0.01;       // seconds
  double ground_height = 0.0;   // meters
  double pressure_radius = 0.0; // 0 = derive from footprint

  void validate() const;
};

/// Push action: base-frame linear velocity plus yaw rate, applied for a
/// fixed duration.
struct Action {
  std::string id;
  Eigen::Vector3d linear{0.1, 0.0, 0.0};  // m/s, robot base frame
  double angular_deg = 0.0;               // deg/s about base z
  double duration = 4.0;                  // seconds
};

/// Pushing plate, contact face at x = 0 in the link frame, +x toward the
/// object.
struct LinkGeometry {
  double width = 0.3;      // meters, along link y
  double height = 0.1;     // meters, along link z
  double thickness = 0.02; // meters, behind the face
};

struct SimResult {
  std::vector<double> times;
  std::vector<Pose> object_traj;
  std::vector<Pose> link_traj;
  bool made_contact = false;
  bool contact_lost = false;
};

ShapeModel gen_shape(const ShapeSpec& spec);

/// Quasi-static planar push with an ellipsoidal limit-surface support
/// model and Coulomb stick/slip at the pusher.
/// base_pose: robot base at t = 0 (world); the link is rigidly attached
/// at link_offset (base-frame pose of the link).
SimResult simulate_push(const ShapeModel& shape, const Pose& object_pose,
                        const Pose& base_pose, const Pose& link_offset,
                        const LinkGeometry& link, const Action& action,
                        double mu, const SimConfig& cfg);

double sample_friction(const SimConfig& cfg, Rng& rng);

/// Centroid position + covariance-eigenvector orientation with a
/// deterministic sign/ordering convention.
Pose estimate_pose_from_cloud(const PointCloud& cloud);

/// Trajectory of a frame rigidly attached to the object; frame_world is
/// its world pose at the first trajectory sample.
std::vector<Pose> frame_trajectory(const SimResult& result,
                                   const Pose& frame_world);

void save_trajectory_csv(const SimResult& result, const std::string& path);

}  // namespace pushkit
