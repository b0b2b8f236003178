#pragma once

#include <string>
#include <vector>

#include "pushkit/pushsim.hpp"
#include "pushkit/query.hpp"

namespace pushkit {

/// Per-action, per-contact-kind motion expert. Each joint kernel pairs
/// the contact condition c = (u, r) observed at push start with the local
/// frame motion observed over the push.
struct MotionModel {
  std::string action_id;
  ContactKind kind = ContactKind::RobotObject;
  ParticleDensity density;  // joint: pose = u, descriptor = r, motion = m
};

struct MotionKernel {
  FrameCondition condition;
  RigidMotion motion;
};

/// Extract one training kernel from a simulated rollout: condition at
/// push start plus the body-frame motion of the tracked contact frame.
/// Throws LostContact when the frame detached during the push.
MotionKernel record_rollout(const SimResult& result,
                            const Pose& frame_world_start,
                            const FrameCondition& condition);

MotionModel build_motion_model(const std::string& action_id, ContactKind kind,
                               const std::vector<MotionKernel>& kernels,
                               const Bandwidths& bw);

/// An expert bound to a concrete prediction query: condition weights
/// are precomputed, candidate object motions are mapped into the local
/// frame through h.
struct Expert {
  const MotionModel* model = nullptr;
  Pose h;  // relative pose of the contact frame to the object frame
  std::vector<double> log_alpha;  // log(w_j K(c | c_j))
  double log_denominator = 0.0;
};

/// Binds a model to a condition; throws UnsupportedCondition when the
/// condition is unlike anything seen in training (the veto regime).
Expert bind_expert(const MotionModel& model, const FrameCondition& condition,
                   const Pose& h);

/// log of the Nadaraya-Watson conditional density at object motion m_b.
double log_expert_conditional(const Expert& expert, const RigidMotion& m_b);

/// Sum of expert log conditionals; -inf when any expert underflows.
double poe_score(const std::vector<Expert>& experts, const RigidMotion& m_b);

struct Prediction {
  RigidMotion motion;
  double log_likelihood = 0.0;
  int rank = 0;
};

struct PredictConfig {
  int candidates = 500;
  int seeds = 100;
  int iterations = 100;
  int keep = 10;
  double dedup_translation = 1e-3;           // meters
  double dedup_rotation = 0.5 * 3.14159265358979323846 / 180.0;
  AnnealSchedule schedule{100, 1.0, 1e-2};
};

/// Seed candidates from the robot-object expert's kernel mixture, keep
/// the PoE-likeliest of each batch, refine by annealing, return the top
/// distinct candidates by log-likelihood.
std::vector<Prediction> predict(const std::vector<Expert>& experts,
                                const PredictConfig& cfg, Rng& rng);

std::string motion_model_to_json(const MotionModel& model);
MotionModel motion_model_from_json(const std::string& json);

}  // namespace pushkit
