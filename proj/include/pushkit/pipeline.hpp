#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pushkit/motion.hpp"

namespace pushkit {

/// Line-oriented key=value configuration ('#' comments, blank lines
/// ignored).
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  static KeyValueConfig load(const std::string& path);
  static KeyValueConfig parse(const std::string& text);

  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
};

struct ExperimentConfig {
  std::string scale = "desk";
  ShapeSpec training_object;
  std::vector<ShapeSpec> test_objects;

  int contacts_front = 20;
  int contacts_side = 20;
  int rollouts = 5;
  int env_samples = 300;            // features sampled for the C^E model
  int env_kernels_per_rollout = 2;  // environment frames tracked per rollout
  int max_env_kernels = 100;        // per-model cap, subsampled by seed

  double cutoff_robot = 0.01;  // meters
  double delta_e = 0.05;       // meters
  int k_q = 200;

  int query_poses = 3;  // per test object per contact model
  int repeats = 4;
  std::vector<int> training_sizes{100, 200, 500};
  std::vector<std::string> predictors{"ro", "ro3oe", "ro5oe"};

  Bandwidths bandwidths;
  SimConfig sim;
  LinkGeometry link;
  PredictConfig predict;
  AnnealSchedule frame_schedule{100, 1.0, 1e-2};

  bool baseline_integrated_alpha = false;  // alpha = omega * duration
  int score_rank = 1;                      // 1 = rank-1, 0 = best-of-10
  int threads = 0;                         // 0 = hardware concurrency
  std::uint64_t seed = 7;

  static ExperimentConfig preset(const std::string& scale);
  void apply(const KeyValueConfig& overrides);
  std::string digest() const;  // config hash for provenance
};

struct ActionSets {
  std::vector<Action> front;
  std::vector<Action> side;
};

/// Front link: linear plus both angular pushes; side link: the angular
/// push directed away from the contact surface is excluded.
ActionSets build_action_set();

/// Push length normalizer L = |a_lin| * duration.
double push_length(const ActionSets& actions);

/// Pose of the link in the robot base frame.
Pose link_offset_front(const LinkGeometry& link, double link_z);
Pose link_offset_side(const LinkGeometry& link, double link_z);

/// World translation applied by the planar baseline predictor; identity
/// rotation by construction.
RigidMotion baseline_predict(const Action& action, const Pose& com_pose,
                             const Pose& robot_pose,
                             bool integrated_alpha = false);

double d_ang(const Eigen::Quaterniond& q_test,
             const Eigen::Quaterniond& q_pred);
double d_norm(double d_lin, double d_ang_value, double length);

// --- model bundle ---------------------------------------------------------

struct MotionModelPair {
  MotionModel robot;
  std::optional<MotionModel> env;
};

struct ModelBundle {
  ContactModel front;
  ContactModel side;
  ContactModel environment;
  std::map<std::string, MotionModelPair> motion;  // by action id
  std::uint64_t seed = 0;
  std::string config_digest;
  int total_pushes = 0;
};

ModelBundle run_training(const ExperimentConfig& cfg);

/// Deterministically subsample motion kernels down to a total budget of
/// n_pushes across all models, mirroring training-set-size ablations.
ModelBundle subset_bundle(const ModelBundle& bundle, int n_pushes);

void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

// --- evaluation -----------------------------------------------------------

struct PushRow {
  std::string object;
  std::string link;     // "front" | "side"
  std::string action;
  int query_pose = 0;
  int repeat = 0;
  std::string predictor;  // "baseline" | "ro" | "ro3oe" | "ro5oe"
  double d_lin = 0.0;
  double d_ang = 0.0;
  double d_norm = 0.0;
  std::string error;  // empty on success
};

struct SummaryCell {
  double mean_d_norm = 0.0;
  double std_d_norm = 0.0;
  double mean_d_lin = 0.0;
  double mean_d_ang = 0.0;
  int count = 0;
  int failures = 0;
};

struct EvaluationReport {
  std::vector<PushRow> rows;
  /// keyed by (object|"total", predictor)
  std::map<std::pair<std::string, std::string>, SummaryCell> summary;
  double length = 0.4;
};

EvaluationReport run_evaluation(const ExperimentConfig& cfg,
                                const ModelBundle& bundle);

/// One-off prediction for a novel object given as a point cloud resting on
/// the ground: builds the query density for the requested link
/// ("front"/"side"), selects a contact, binds the experts for the given
/// action and predictor, and returns the ranked motion list. When
/// b_est_out is non-null the estimated object frame is written to it.
std::vector<Prediction> predict_for_cloud(
    const ExperimentConfig& cfg, const ModelBundle& bundle,
    const PointCloud& cloud, const std::string& link,
    const std::string& action_id, const std::string& predictor, Rng& rng,
    Pose* b_est_out = nullptr);

/// Recompute summary cells from rows.
void summarize(EvaluationReport& report);

void write_report(const EvaluationReport& report, const std::string& dir);
EvaluationReport read_report_rows(const std::string& csv_path);

}  // namespace pushkit
