#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pushkit/contact.hpp"
#include "pushkit/optimize.hpp"

namespace pushkit {

/// One query kernel: absolute body pose s generated on the novel object,
/// the surface frame v it was generated from, and that frame's curvature.
struct QueryParticle {
  Pose s;
  Pose v;
  Eigen::Vector2d r{Eigen::Vector2d::Zero()};
  double weight = 0.0;
};

struct QueryDensity {
  ContactKind kind = ContactKind::RobotObject;
  std::vector<QueryParticle> particles;
  Bandwidths bandwidths;
};

/// Conditioning pair for a motion expert.
struct FrameCondition {
  Pose u;
  Eigen::Vector2d r{Eigen::Vector2d::Zero()};
};

struct ContactFrame {
  Pose v;
  FrameCondition condition;
};

/// Selected contact frames for one prediction: the robot-object frame
/// plus N_E environment frames, each with its fixed relative pose h to
/// the object frame.
struct ContactFrameSet {
  ContactFrame robot;
  Pose link_pose;
  Pose h_robot;
  std::vector<ContactFrame> env;
  std::vector<Pose> h_env;
};

QueryDensity build_query_density(const ContactModel& model,
                                 const std::vector<SurfaceFeature>& features,
                                 int k_q, Rng& rng);

/// Kernel density value of the link-pose marginal Q(s).
double eval_link_pose_marginal(const QueryDensity& q, const Pose& s);

/// Kernel density value of the surface-frame marginal Q(v).
double eval_frame_marginal(const QueryDensity& q, const Pose& v);

Pose sample_link_pose(const QueryDensity& q, Rng& rng);

/// Rejection-sample a link pose satisfying the feasibility predicate;
/// throws NoContact after max_tries rejections.
Pose sample_link_pose_feasible(const QueryDensity& q,
                               const std::function<bool(const Pose&)>& ok,
                               Rng& rng, int max_tries = 100);

/// Annealed argmax of the v-marginal. When link_pose is given, particles
/// are additionally weighted by consistency of their s with it, and the
/// returned condition uses u = v^-1 o link_pose.
ContactFrame select_contact_frame(const QueryDensity& q,
                                  const AnnealSchedule& schedule, Rng& rng,
                                  const Pose* link_pose = nullptr);

std::vector<ContactFrame> sample_env_frames(const QueryDensity& q, int n_e,
                                            Rng& rng);

std::string query_density_to_json(const QueryDensity& q);
QueryDensity query_density_from_json(const std::string& json);

}  // namespace pushkit
