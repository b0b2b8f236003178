#include "pushkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "pushkit/error.hpp"

namespace pushkit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLinkZ = 0.1;  // plate centre height above ground

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t task_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  return splitmix64(splitmix64(splitmix64(base ^ a) ^ b) ^ c);
}

std::string object_name(const ShapeSpec& spec) {
  return shape_kind_name(spec.kind);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

// --- config ---------------------------------------------------------------

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Config,
                  "config line " + std::to_string(lineno) + ": missing '='");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{}
                                    : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error(ErrorCode::Config,
                  "config line " + std::to_string(lineno) + ": empty key");
    cfg.values[key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, "bad numeric value for " + key);
  }
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stoi(*v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::Config, "bad integer value for " + key);
  }
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

ExperimentConfig ExperimentConfig::preset(const std::string& scale) {
  ExperimentConfig cfg;
  cfg.scale = scale;
  cfg.training_object =
      ShapeSpec{ShapeKind::Cube, {0.2}, 0.5, 2e4};
  cfg.test_objects = {
      ShapeSpec{ShapeKind::Cuboid, {0.2, 0.3, 0.2}, 0.5, 2e4},
      ShapeSpec{ShapeKind::Cube, {0.2}, 0.5, 2e4},
      ShapeSpec{ShapeKind::RoundedPrism, {0.2, 0.2, 0.05}, 0.5, 2e4},
      ShapeSpec{ShapeKind::TriangularPrism, {0.2, 0.2}, 0.5, 2e4},
      ShapeSpec{ShapeKind::Cylinder, {0.1, 0.2}, 0.5, 2e4},
  };
  if (scale == "desk") {
    cfg.contacts_front = 20;
    cfg.contacts_side = 20;
    cfg.env_samples = 300;
    cfg.query_poses = 3;
    cfg.k_q = 100;
    cfg.predict.candidates = 16;
    cfg.predict.seeds = 8;
    cfg.predict.iterations = 30;
    cfg.predict.schedule = AnnealSchedule{30, 1.0, 1e-2};
    cfg.frame_schedule = AnnealSchedule{60, 1.0, 1e-2};
  } else if (scale == "paper") {
    cfg.contacts_front = 100;
    cfg.contacts_side = 100;
    cfg.env_samples = 1000;
    cfg.query_poses = 50;
    cfg.k_q = 200;
    cfg.predict.candidates = 500;
    cfg.predict.seeds = 100;
    cfg.predict.iterations = 100;
    cfg.predict.schedule = AnnealSchedule{100, 1.0, 1e-2};
    cfg.frame_schedule = AnnealSchedule{100, 1.0, 1e-2};
  } else {
    throw Error(ErrorCode::Config, "unknown scale preset: " + scale);
  }
  return cfg;
}

void ExperimentConfig::apply(const KeyValueConfig& kv) {
  seed = static_cast<std::uint64_t>(kv.get_double("seed", static_cast<double>(seed)));
  threads = kv.get_int("threads", threads);
  contacts_front = kv.get_int("contacts_front", contacts_front);
  contacts_side = kv.get_int("contacts_side", contacts_side);
  rollouts = kv.get_int("rollouts", rollouts);
  env_samples = kv.get_int("env_samples", env_samples);
  env_kernels_per_rollout =
      kv.get_int("env_kernels_per_rollout", env_kernels_per_rollout);
  max_env_kernels = kv.get_int("max_env_kernels", max_env_kernels);
  cutoff_robot = kv.get_double("cutoff_robot", cutoff_robot);
  delta_e = kv.get_double("delta_e", delta_e);
  k_q = kv.get_int("k_q", k_q);
  query_poses = kv.get_int("query_poses", query_poses);
  repeats = kv.get_int("repeats", repeats);
  bandwidths.sigma_p = kv.get_double("sigma_p", bandwidths.sigma_p);
  bandwidths.sigma_q = kv.get_double("sigma_q", bandwidths.sigma_q);
  bandwidths.sigma_r = kv.get_double("sigma_r", bandwidths.sigma_r);
  bandwidths.sigma_m_p = kv.get_double("sigma_m_p", bandwidths.sigma_m_p);
  bandwidths.sigma_m_q = kv.get_double("sigma_m_q", bandwidths.sigma_m_q);
  sim.friction_min = kv.get_double("friction_min", sim.friction_min);
  sim.friction_max = kv.get_double("friction_max", sim.friction_max);
  sim.timestep = kv.get_double("timestep", sim.timestep);
  predict.candidates = kv.get_int("candidates", predict.candidates);
  predict.seeds = kv.get_int("prediction_seeds", predict.seeds);
  predict.iterations = kv.get_int("iterations", predict.iterations);
  predict.schedule.iterations = predict.iterations;
  predict.keep = kv.get_int("keep", predict.keep);
  baseline_integrated_alpha =
      kv.get_int("baseline_integrated_alpha",
                 baseline_integrated_alpha ? 1 : 0) != 0;
  score_rank = kv.get_int("score_rank", score_rank);
  double density = kv.get_double("sampling_density", -1.0);
  if (density > 0) {
    training_object.sampling_density = density;
    for (auto& o : test_objects) o.sampling_density = density;
  }
  if (auto sizes = kv.get("training_sizes")) {
    training_sizes.clear();
    std::istringstream ss(*sizes);
    std::string tok;
    while (std::getline(ss, tok, ',')) training_sizes.push_back(std::stoi(tok));
  }
  if (auto preds = kv.get("predictors")) {
    predictors.clear();
    std::istringstream ss(*preds);
    std::string tok;
    while (std::getline(ss, tok, ',')) predictors.push_back(tok);
  }
}

std::string ExperimentConfig::digest() const {
  std::ostringstream ss;
  ss << scale << "|" << seed << "|" << contacts_front << "|" << contacts_side
     << "|" << rollouts << "|" << env_samples << "|" << k_q << "|"
     << query_poses << "|" << repeats << "|" << bandwidths.sigma_p << "|"
     << bandwidths.sigma_q << "|" << bandwidths.sigma_r << "|"
     << bandwidths.sigma_m_p << "|" << bandwidths.sigma_m_q << "|"
     << predict.candidates << "|" << predict.seeds << "|"
     << predict.iterations;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : ss.str()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

// --- actions and baseline -------------------------------------------------

ActionSets build_action_set() {
  ActionSets sets;
  Action linear{"linear", {0.1, 0.0, 0.0}, 0.0, 4.0};
  Action ccw{"ang+10", {0.1, 0.0, 0.0}, 10.0, 4.0};
  Action cw{"ang-10", {0.1, 0.0, 0.0}, -10.0, 4.0};
  sets.front = {linear, ccw, cw};
  // the side link loses contact under the away-turning push
  sets.side = {linear, cw};
  return sets;
}

double push_length(const ActionSets& actions) {
  const Action& lin = actions.front.front();
  return lin.linear.norm() * lin.duration;
}

Pose link_offset_front(const LinkGeometry&, double link_z) {
  return Pose(Eigen::Vector3d(0.25, 0.0, link_z),
              Eigen::Quaterniond::Identity());
}

Pose link_offset_side(const LinkGeometry&, double link_z) {
  // right-hand bumper corner, plate normal 45 degrees off the drive axis
  return Pose(Eigen::Vector3d(0.2, -0.15, link_z),
              Eigen::Quaterniond(Eigen::AngleAxisd(
                  -kPi / 4, Eigen::Vector3d::UnitZ())));
}

RigidMotion baseline_predict(const Action& action, const Pose& com_pose,
                             const Pose& robot_pose, bool integrated_alpha) {
  (void)com_pose;  // true COM pose; the translation is COM-independent
  double alpha_deg =
      integrated_alpha ? action.angular_deg * action.duration
                       : action.angular_deg;
  double alpha = alpha_deg * kPi / 180.0;
  Eigen::Vector3d a_tilde =
      Eigen::AngleAxisd(alpha, Eigen::Vector3d::UnitZ()) * action.linear;
  Eigen::Vector3d translation = robot_pose.q * (a_tilde * action.duration);
  return RigidMotion(translation, Eigen::Quaterniond::Identity());
}

double d_ang(const Eigen::Quaterniond& q_test,
             const Eigen::Quaterniond& q_pred) {
  if (std::abs(q_test.norm() - 1.0) > 1e-6 ||
      std::abs(q_pred.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::NonUnitQuaternion, "d_ang needs unit quaternions");
  double dot = q_test.coeffs().dot(q_pred.coeffs());
  return 1.0 - dot * dot;
}

double d_norm(double d_lin, double d_ang_value, double length) {
  if (length <= 0) throw Error(ErrorCode::Config, "L must be positive");
  return 0.5 * d_ang_value + d_lin / (2.0 * length);
}

// --- training -------------------------------------------------------------

namespace {

PointCloud world_cloud(const ShapeModel& shape, const Pose& object_pose) {
  PointCloud out;
  out.points.reserve(shape.cloud.size());
  for (const auto& p : shape.cloud.points)
    out.points.push_back(object_pose.p + object_pose.q * p);
  return out;
}

PointCloud link_face_cloud(const Pose& link_pose, const LinkGeometry& link) {
  PointCloud out;
  const double step = 0.01;
  for (double y = -link.width / 2 + step / 2; y < link.width / 2; y += step) {
    for (double z = -link.height / 2 + step / 2; z < link.height / 2;
         z += step) {
      out.points.push_back(link_pose.p +
                           link_pose.q * Eigen::Vector3d(0.0, y, z));
    }
  }
  return out;
}

/// Full-face training placement of the plate against the +x face of the
/// resting training object.
Pose full_face_link_pose(const ShapeModel& shape, const Pose& object_pose) {
  double face_x = 0;
  for (const auto& v : shape.footprint) face_x = std::max(face_x, v.x());
  return Pose(object_pose.p + Eigen::Vector3d(face_x, 0.0, kLinkZ -
                                              shape.height / 2),
              Eigen::Quaterniond(
                  Eigen::AngleAxisd(kPi, Eigen::Vector3d::UnitZ())));
}

struct FeasibilityChecker {
  const PointCloud* cloud = nullptr;
  LinkGeometry link;
  double ground = 0.0;

  bool operator()(const Pose& s) const {
    Eigen::Vector3d z_axis = s.q * Eigen::Vector3d::UnitZ();
    if (z_axis.z() < std::cos(10.0 * kPi / 180.0)) return false;
    if (s.p.z() - link.height / 2 < ground - 0.02) return false;
    Pose inv = inverse(s);
    double min_gap = 1e9;
    for (const auto& p : cloud->points) {
      Eigen::Vector3d q = inv.p + inv.q * p;
      if (std::abs(q.y()) > link.width / 2 ||
          std::abs(q.z()) > link.height / 2)
        continue;
      if (q.x() < -0.002) return false;  // interpenetration beyond 2 mm
      min_gap = std::min(min_gap, q.x());
    }
    return min_gap < 0.02;  // must actually be at the surface
  }
};

/// Project a sampled link pose onto the planar working convention:
/// yaw-only orientation, plate centre at the standard height.
Pose snap_link_pose(const Pose& s, double ground) {
  Eigen::Vector3d x_axis = s.q * Eigen::Vector3d::UnitX();
  double yaw = std::atan2(x_axis.y(), x_axis.x());
  return Pose(Eigen::Vector3d(s.p.x(), s.p.y(), ground + kLinkZ),
              Eigen::Quaterniond(
                  Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ())));
}

struct LinkSetup {
  std::string name;  // "front" | "side"
  const ContactModel* contact;
  Pose offset;
  const std::vector<Action>* actions;
};

}  // namespace

ModelBundle run_training(const ExperimentConfig& cfg) {
  cfg.bandwidths.validate();
  cfg.sim.validate();
  Rng rng(cfg.seed);

  ShapeModel shape = gen_shape(cfg.training_object);
  const Pose object_pose(
      Eigen::Vector3d(0, 0, cfg.sim.ground_height + shape.height / 2),
      Eigen::Quaterniond::Identity());
  PointCloud cloud = world_cloud(shape, object_pose);
  auto features = build_features(cloud);
  if (features.empty())
    throw Error(ErrorCode::EmptyFeatures, "no features on training object");

  // contact models: both links in full contact with a face of the cube
  Pose face_pose = full_face_link_pose(shape, object_pose);
  PointCloud face_cloud = link_face_cloud(face_pose, cfg.link);
  ModelBundle bundle;
  bundle.seed = cfg.seed;
  bundle.config_digest = cfg.digest();
  bundle.front = learn_robot_object(features, face_pose, face_cloud,
                                    cfg.cutoff_robot, cfg.bandwidths);
  bundle.side = bundle.front;
  bundle.side.kind = ContactKind::RobotObject;
  bundle.environment = learn_object_environment(
      features, cfg.sim.ground_height, cfg.delta_e, cfg.env_samples,
      cfg.bandwidths, rng);

  ActionSets actions = build_action_set();
  LinkSetup setups[2] = {
      {"front", &bundle.front, link_offset_front(cfg.link, kLinkZ),
       &actions.front},
      {"side", &bundle.side, link_offset_side(cfg.link, kLinkZ),
       &actions.side},
  };

  QueryDensity env_query =
      build_query_density(bundle.environment, features, cfg.k_q, rng);

  FeasibilityChecker feasible{&cloud, cfg.link, cfg.sim.ground_height};

  std::map<std::string, std::vector<MotionKernel>> robot_kernels;
  std::map<std::string, std::vector<MotionKernel>> env_kernels;
  int total_pushes = 0;

  for (const LinkSetup& setup : setups) {
    QueryDensity query =
        build_query_density(*setup.contact, features, cfg.k_q, rng);
    const int n_contacts =
        setup.name == "front" ? cfg.contacts_front : cfg.contacts_side;
    for (int ci = 0; ci < n_contacts; ++ci) {
      Pose s = snap_link_pose(
          sample_link_pose_feasible(query, feasible, rng),
          cfg.sim.ground_height);
      ContactFrame frame =
          select_contact_frame(query, cfg.frame_schedule, rng, &s);
      Pose base = compose(s, inverse(setup.offset));

      for (const Action& action : *setup.actions) {
        std::string action_id = setup.name + "-" + action.id;
        for (int ri = 0; ri < cfg.rollouts; ++ri) {
          double mu = sample_friction(cfg.sim, rng);
          auto env_frames =
              sample_env_frames(env_query, cfg.env_kernels_per_rollout, rng);
          ++total_pushes;
          SimResult sim;
          try {
            sim = simulate_push(shape, object_pose, base, setup.offset,
                                cfg.link, action, mu, cfg.sim);
          } catch (const Error&) {
            continue;  // no contact: push discarded, count kept
          }
          try {
            robot_kernels[action_id].push_back(
                record_rollout(sim, frame.v, frame.condition));
          } catch (const Error&) {
            // contact lost: excluded from the model
          }
          if (!sim.contact_lost) {
            for (const auto& ef : env_frames) {
              env_kernels[action_id].push_back(
                  record_rollout(sim, ef.v, ef.condition));
            }
          }
        }
      }
    }
  }
  bundle.total_pushes = total_pushes;

  for (auto& [action_id, kernels] : robot_kernels) {
    if (kernels.empty())
      throw Error(ErrorCode::EmptyModel,
                  "no usable rollouts for action " + action_id);
    MotionModelPair pair;
    pair.robot = build_motion_model(action_id, ContactKind::RobotObject,
                                    kernels, cfg.bandwidths);
    auto it = env_kernels.find(action_id);
    if (it != env_kernels.end() && !it->second.empty()) {
      auto& ek = it->second;
      if (static_cast<int>(ek.size()) > cfg.max_env_kernels) {
        std::vector<MotionKernel> kept;
        for (int i = 0; i < cfg.max_env_kernels; ++i)
          kept.push_back(ek[i * ek.size() / cfg.max_env_kernels]);
        ek = std::move(kept);
      }
      pair.env = build_motion_model(action_id, ContactKind::ObjectEnvironment,
                                    ek, cfg.bandwidths);
    }
    bundle.motion[action_id] = std::move(pair);
  }
  return bundle;
}

ModelBundle subset_bundle(const ModelBundle& bundle, int n_pushes) {
  if (n_pushes <= 0 || bundle.total_pushes <= 0)
    throw Error(ErrorCode::Config, "bad subset size");
  double frac = std::min(
      1.0, static_cast<double>(n_pushes) / bundle.total_pushes);
  ModelBundle out = bundle;
  out.total_pushes = std::min(n_pushes, bundle.total_pushes);
  auto thin = [&](MotionModel& model) {
    const auto& parts = model.density.particles;
    int keep = std::max(
        1, static_cast<int>(std::llround(frac * parts.size())));
    if (keep >= static_cast<int>(parts.size())) return;
    std::vector<Particle> kept;
    for (int i = 0; i < keep; ++i)
      kept.push_back(parts[static_cast<std::size_t>(i) * parts.size() / keep]);
    double w = 1.0 / keep;
    for (auto& p : kept) p.weight = w;
    model.density.particles = std::move(kept);
  };
  for (auto& [id, pair] : out.motion) {
    thin(pair.robot);
    if (pair.env) thin(*pair.env);
  }
  return out;
}

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + name);
    out << text;
  };
  write("contact_front.json", contact_model_to_json(bundle.front));
  write("contact_side.json", contact_model_to_json(bundle.side));
  write("contact_env.json", contact_model_to_json(bundle.environment));
  json manifest;
  manifest["format"] = "pushkit-bundle";
  manifest["version"] = 1;
  manifest["seed"] = bundle.seed;
  manifest["config_digest"] = bundle.config_digest;
  manifest["total_pushes"] = bundle.total_pushes;
  json motions = json::array();
  for (const auto& [id, pair] : bundle.motion) {
    std::string robot_file = "motion_" + id + "_robot.json";
    write(robot_file, motion_model_to_json(pair.robot));
    json entry{{"action", id}, {"robot", robot_file}};
    if (pair.env) {
      std::string env_file = "motion_" + id + "_env.json";
      write(env_file, motion_model_to_json(*pair.env));
      entry["env"] = env_file;
    }
    motions.push_back(entry);
  }
  manifest["motion_models"] = motions;
  write("manifest.json", manifest.dump(2));
}

ModelBundle load_bundle(const std::string& dir) {
  auto read = [&](const std::string& name) {
    std::ifstream in(fs::path(dir) / name);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + name + " in " + dir);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  json manifest = json::parse(read("manifest.json"));
  if (manifest.value("format", "") != "pushkit-bundle")
    throw Error(ErrorCode::Io, "not a model bundle: " + dir);
  ModelBundle bundle;
  bundle.seed = manifest.at("seed");
  bundle.config_digest = manifest.at("config_digest");
  bundle.total_pushes = manifest.at("total_pushes");
  bundle.front = contact_model_from_json(read("contact_front.json"));
  bundle.side = contact_model_from_json(read("contact_side.json"));
  bundle.environment = contact_model_from_json(read("contact_env.json"));
  for (const auto& entry : manifest.at("motion_models")) {
    MotionModelPair pair;
    pair.robot = motion_model_from_json(
        read(entry.at("robot").get<std::string>()));
    if (entry.contains("env"))
      pair.env = motion_model_from_json(
          read(entry.at("env").get<std::string>()));
    bundle.motion[entry.at("action").get<std::string>()] = std::move(pair);
  }
  return bundle;
}

// --- evaluation -----------------------------------------------------------

namespace {

struct EvalTask {
  int object_idx;
  int link_idx;  // 0 front, 1 side
  int pose_idx;
};

int env_contacts_for(const std::string& predictor) {
  if (predictor == "ro") return 0;
  if (predictor == "ro3oe") return 3;
  if (predictor == "ro5oe") return 5;
  throw Error(ErrorCode::Config, "unknown predictor: " + predictor);
}

}  // namespace

EvaluationReport run_evaluation(const ExperimentConfig& cfg,
                                const ModelBundle& bundle) {
  ActionSets actions = build_action_set();
  const double length = push_length(actions);

  // per-object precomputation (features, query densities are rebuilt per
  // task from task-local RNGs to keep scheduling-independent determinism;
  // shapes and features are deterministic and shared)
  struct ObjectData {
    ShapeModel shape;
    Pose object_pose;
    PointCloud cloud;
    std::vector<SurfaceFeature> features;
    Pose b_est;
  };
  std::vector<ObjectData> objects;
  for (const auto& spec : cfg.test_objects) {
    ObjectData od;
    od.shape = gen_shape(spec);
    od.object_pose =
        Pose(Eigen::Vector3d(0, 0, cfg.sim.ground_height +
                                       od.shape.height / 2),
             Eigen::Quaterniond::Identity());
    od.cloud = world_cloud(od.shape, od.object_pose);
    od.features = build_features(od.cloud);
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : od.cloud.points) centroid += p;
    centroid /= static_cast<double>(od.cloud.size());
    od.b_est = Pose(centroid, Eigen::Quaterniond::Identity());
    objects.push_back(std::move(od));
  }

  const Pose offsets[2] = {link_offset_front(cfg.link, kLinkZ),
                           link_offset_side(cfg.link, kLinkZ)};
  const ContactModel* link_models[2] = {&bundle.front, &bundle.side};
  const std::vector<Action>* link_actions[2] = {&actions.front,
                                                &actions.side};
  const char* link_names[2] = {"front", "side"};

  std::vector<EvalTask> tasks;
  for (int oi = 0; oi < static_cast<int>(objects.size()); ++oi)
    for (int li = 0; li < 2; ++li)
      for (int pi = 0; pi < cfg.query_poses; ++pi)
        tasks.push_back(EvalTask{oi, li, pi});

  std::vector<std::vector<PushRow>> task_rows(tasks.size());

  auto run_task = [&](std::size_t ti) {
    const EvalTask& task = tasks[ti];
    const ObjectData& od = objects[task.object_idx];
    Rng rng(task_seed(cfg.seed, task.object_idx, task.link_idx,
                      task.pose_idx));
    std::vector<PushRow>& rows = task_rows[ti];
    const std::string obj_name = object_name(od.shape.spec);
    const std::string link_name = link_names[task.link_idx];

    auto emit_failures = [&](const std::string& why) {
      for (const Action& action : *link_actions[task.link_idx]) {
        for (int rep = 0; rep < cfg.repeats; ++rep) {
          for (const auto& pred : cfg.predictors) {
            PushRow row{obj_name, link_name, action.id, task.pose_idx, rep,
                        pred, 0, 0, 0, why};
            rows.push_back(row);
          }
          PushRow row{obj_name, link_name, action.id, task.pose_idx, rep,
                      "baseline", 0, 0, 0, why};
          rows.push_back(row);
        }
      }
    };

    QueryDensity query;
    QueryDensity env_query;
    Pose s;
    ContactFrame frame;
    std::vector<ContactFrame> env_frames;
    try {
      query = build_query_density(*link_models[task.link_idx], od.features,
                                  cfg.k_q, rng);
      env_query = build_query_density(bundle.environment, od.features,
                                      cfg.k_q, rng);
      FeasibilityChecker feasible{&od.cloud, cfg.link,
                                  cfg.sim.ground_height};
      s = snap_link_pose(sample_link_pose_feasible(query, feasible, rng),
                         cfg.sim.ground_height);
      frame = select_contact_frame(query, cfg.frame_schedule, rng, &s);
      env_frames = sample_env_frames(env_query, 5, rng);
    } catch (const Error& e) {
      emit_failures(error_code_name(e.code()));
      return;
    }

    Pose base = compose(s, inverse(offsets[task.link_idx]));
    Pose h_robot = relative_pose(frame.v, od.b_est);

    for (const Action& action : *link_actions[task.link_idx]) {
      std::string action_id = std::string(link_name) + "-" + action.id;
      auto mm = bundle.motion.find(action_id);
      for (int rep = 0; rep < cfg.repeats; ++rep) {
        double mu = sample_friction(cfg.sim, rng);
        SimResult sim;
        try {
          sim = simulate_push(od.shape, od.object_pose, base,
                              offsets[task.link_idx], cfg.link, action, mu,
                              cfg.sim);
        } catch (const Error& e) {
          for (const auto& pred : cfg.predictors)
            rows.push_back(PushRow{obj_name, link_name, action.id,
                                   task.pose_idx, rep, pred, 0, 0, 0,
                                   error_code_name(e.code())});
          rows.push_back(PushRow{obj_name, link_name, action.id,
                                 task.pose_idx, rep, "baseline", 0, 0, 0,
                                 error_code_name(e.code())});
          continue;
        }

        // ground-truth motion of the estimated object frame
        Pose hb = compose(inverse(sim.object_traj.front()), od.b_est);
        Pose b_true_end = compose(sim.object_traj.back(), hb);

        auto score_pose = [&](const Pose& predicted, const std::string& pred,
                              double& out_lin, double& out_ang) {
          out_lin = (b_true_end.p - predicted.p).norm();
          out_ang = d_ang(b_true_end.q, predicted.q);
          rows.push_back(PushRow{obj_name, link_name, action.id,
                                 task.pose_idx, rep, pred, out_lin, out_ang,
                                 d_norm(out_lin, out_ang, length), ""});
        };

        // baseline
        {
          RigidMotion b = baseline_predict(action, od.b_est, base,
                                           cfg.baseline_integrated_alpha);
          Pose predicted(od.b_est.p + b.p, od.b_est.q);
          double dl, da;
          score_pose(predicted, "baseline", dl, da);
        }

        for (const auto& pred : cfg.predictors) {
          if (mm == bundle.motion.end()) {
            rows.push_back(PushRow{obj_name, link_name, action.id,
                                   task.pose_idx, rep, pred, 0, 0, 0,
                                   "missing-motion-model"});
            continue;
          }
          try {
            std::vector<Expert> experts;
            experts.push_back(
                bind_expert(mm->second.robot, frame.condition, h_robot));
            int n_env = env_contacts_for(pred);
            if (n_env > 0 && mm->second.env) {
              for (int k = 0; k < n_env &&
                              k < static_cast<int>(env_frames.size());
                   ++k) {
                Pose h_env = relative_pose(env_frames[k].v, od.b_est);
                experts.push_back(bind_expert(*mm->second.env,
                                              env_frames[k].condition,
                                              h_env));
              }
            }
            auto predictions = predict(experts, cfg.predict, rng);
            const Prediction* chosen = &predictions.front();
            if (cfg.score_rank == 0) {
              double best = 1e18;
              for (const auto& cand : predictions) {
                Pose pp = apply_motion(od.b_est, cand.motion);
                double dn = d_norm((b_true_end.p - pp.p).norm(),
                                   d_ang(b_true_end.q, pp.q), length);
                if (dn < best) {
                  best = dn;
                  chosen = &cand;
                }
              }
            }
            Pose predicted = apply_motion(od.b_est, chosen->motion);
            double dl, da;
            score_pose(predicted, pred, dl, da);
          } catch (const Error& e) {
            rows.push_back(PushRow{obj_name, link_name, action.id,
                                   task.pose_idx, rep, pred, 0, 0, 0,
                                   error_code_name(e.code())});
          }
        }
      }
    }
  };

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::max(
                            1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      std::size_t ti = next.fetch_add(1);
      if (ti >= tasks.size()) return;
      run_task(ti);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  EvaluationReport report;
  report.length = length;
  for (auto& rows : task_rows)
    for (auto& row : rows) report.rows.push_back(std::move(row));
  summarize(report);
  return report;
}

std::vector<Prediction> predict_for_cloud(
    const ExperimentConfig& cfg, const ModelBundle& bundle,
    const PointCloud& cloud, const std::string& link,
    const std::string& action_id, const std::string& predictor, Rng& rng,
    Pose* b_est_out) {
  if (link != "front" && link != "side")
    throw Error(ErrorCode::Config, "unknown link: " + link);
  const ContactModel& contact =
      link == "front" ? bundle.front : bundle.side;
  auto mm = bundle.motion.find(link + "-" + action_id);
  if (mm == bundle.motion.end())
    throw Error(ErrorCode::Config,
                "no motion model for action " + link + "-" + action_id);

  auto features = build_features(cloud);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.size());
  Pose b_est(centroid, Eigen::Quaterniond::Identity());
  if (b_est_out) *b_est_out = b_est;

  QueryDensity query = build_query_density(contact, features, cfg.k_q, rng);
  FeasibilityChecker feasible{&cloud, cfg.link, cfg.sim.ground_height};
  Pose s = snap_link_pose(sample_link_pose_feasible(query, feasible, rng),
                          cfg.sim.ground_height);
  ContactFrame frame = select_contact_frame(query, cfg.frame_schedule, rng,
                                            &s);

  std::vector<Expert> experts;
  experts.push_back(bind_expert(mm->second.robot, frame.condition,
                                relative_pose(frame.v, b_est)));
  int n_env = env_contacts_for(predictor);
  if (n_env > 0) {
    if (!mm->second.env)
      throw Error(ErrorCode::EmptyModel,
                  "no environment motion model for this action");
    QueryDensity env_query =
        build_query_density(bundle.environment, features, cfg.k_q, rng);
    for (const auto& ef : sample_env_frames(env_query, n_env, rng)) {
      experts.push_back(bind_expert(*mm->second.env, ef.condition,
                                    relative_pose(ef.v, b_est)));
    }
  }
  return predict(experts, cfg.predict, rng);
}

void summarize(EvaluationReport& report) {
  report.summary.clear();
  struct Acc {
    double sum = 0, sum2 = 0, sum_lin = 0, sum_ang = 0;
    int n = 0, failures = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> accs;
  for (const auto& row : report.rows) {
    for (const std::string obj : {row.object, std::string("total")}) {
      Acc& a = accs[{obj, row.predictor}];
      if (!row.error.empty()) {
        ++a.failures;
        continue;
      }
      a.sum += row.d_norm;
      a.sum2 += row.d_norm * row.d_norm;
      a.sum_lin += row.d_lin;
      a.sum_ang += row.d_ang;
      ++a.n;
    }
  }
  for (const auto& [key, a] : accs) {
    SummaryCell cell;
    cell.count = a.n;
    cell.failures = a.failures;
    if (a.n > 0) {
      cell.mean_d_norm = a.sum / a.n;
      cell.mean_d_lin = a.sum_lin / a.n;
      cell.mean_d_ang = a.sum_ang / a.n;
      double var = a.sum2 / a.n - cell.mean_d_norm * cell.mean_d_norm;
      cell.std_d_norm = std::sqrt(std::max(0.0, var));
    }
    report.summary[key] = cell;
  }
}

void write_report(const EvaluationReport& report, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "report.csv");
    if (!out) throw Error(ErrorCode::Io, "cannot write report.csv");
    out << "object,link,action,query_pose,repeat,predictor,d_lin,d_ang,"
           "d_norm,error\n";
    for (const auto& r : report.rows) {
      out << r.object << "," << r.link << "," << r.action << ","
          << r.query_pose << "," << r.repeat << "," << r.predictor << ","
          << format_double(r.d_lin) << "," << format_double(r.d_ang) << ","
          << format_double(r.d_norm) << "," << r.error << "\n";
    }
  }
  {
    json j;
    j["format"] = "pushkit-report";
    j["version"] = 1;
    j["length"] = report.length;
    for (const auto& [key, cell] : report.summary) {
      json c{{"mean_d_norm", cell.mean_d_norm},
             {"std_d_norm", cell.std_d_norm},
             {"mean_d_lin", cell.mean_d_lin},
             {"mean_d_ang", cell.mean_d_ang},
             {"count", cell.count},
             {"failures", cell.failures}};
      j["summary"][key.first][key.second] = c;
    }
    std::ofstream out(fs::path(dir) / "summary.json");
    if (!out) throw Error(ErrorCode::Io, "cannot write summary.json");
    out << j.dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(dir) / "plot_by_object.csv");
    out << "object,predictor,mean_d_norm,std_d_norm\n";
    for (const auto& [key, cell] : report.summary)
      out << key.first << "," << key.second << ","
          << format_double(cell.mean_d_norm) << ","
          << format_double(cell.std_d_norm) << "\n";
  }
}

EvaluationReport read_report_rows(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + csv_path);
  EvaluationReport report;
  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorCode::Io, "empty report: " + csv_path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
    while (cols.size() < 10) cols.push_back("");
    PushRow r;
    r.object = cols[0];
    r.link = cols[1];
    r.action = cols[2];
    r.query_pose = std::stoi(cols[3]);
    r.repeat = std::stoi(cols[4]);
    r.predictor = cols[5];
    r.d_lin = std::stod(cols[6]);
    r.d_ang = std::stod(cols[7]);
    r.d_norm = std::stod(cols[8]);
    r.error = cols[9];
    report.rows.push_back(std::move(r));
  }
  summarize(report);
  return report;
}

}  // namespace pushkit
