#include "pushkit/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

constexpr double kLogFloor = -690.0;  // ~log(1e-300)

}  // namespace

MotionKernel record_rollout(const SimResult& result,
                            const Pose& frame_world_start,
                            const FrameCondition& condition) {
  if (result.contact_lost)
    throw Error(ErrorCode::LostContact, "frame detached during the push");
  if (result.object_traj.size() < 2)
    throw Error(ErrorCode::Unknown, "rollout too short");
  auto traj = frame_trajectory(result, frame_world_start);
  MotionKernel k;
  k.condition = condition;
  k.motion = motion_between(traj.front(), traj.back());
  return k;
}

MotionModel build_motion_model(const std::string& action_id, ContactKind kind,
                               const std::vector<MotionKernel>& kernels,
                               const Bandwidths& bw) {
  if (kernels.empty())
    throw Error(ErrorCode::EmptyModel, "no motion kernels");
  bw.validate();
  MotionModel model;
  model.action_id = action_id;
  model.kind = kind;
  model.density.kind = DensityKind::Joint;
  model.density.bandwidths = bw;
  const double w = 1.0 / static_cast<double>(kernels.size());
  for (const auto& k : kernels) {
    Particle p;
    p.pose = k.condition.u;
    p.descriptor = k.condition.r;
    p.motion = k.motion;
    p.weight = w;
    model.density.particles.push_back(p);
  }
  return model;
}

Expert bind_expert(const MotionModel& model, const FrameCondition& condition,
                   const Pose& h) {
  if (model.density.particles.empty())
    throw Error(ErrorCode::EmptyModel, "empty motion model");
  Expert e;
  e.model = &model;
  e.h = h;
  const Bandwidths& bw = model.density.bandwidths;
  e.log_alpha.reserve(model.density.particles.size());
  for (const auto& p : model.density.particles) {
    double la = std::log(p.weight) +
                log_feature_kernel(condition.u, condition.r, p.pose,
                                   p.descriptor, bw);
    e.log_alpha.push_back(la);
  }
  e.log_denominator = logsumexp(e.log_alpha);
  if (e.log_denominator < kLogFloor)
    throw Error(ErrorCode::UnsupportedCondition,
                "condition unlike any training contact");
  return e;
}

double log_expert_conditional(const Expert& expert, const RigidMotion& m_b) {
  const RigidMotion m_v = object_to_local_motion(m_b, expert.h);
  const Bandwidths& bw = expert.model->density.bandwidths;
  std::vector<double> terms(expert.log_alpha.size());
  for (std::size_t j = 0; j < terms.size(); ++j)
    terms[j] = expert.log_alpha[j] +
               log_motion_kernel(m_v, expert.model->density.particles[j].motion,
                                 bw);
  return logsumexp(terms) - expert.log_denominator;
}

double poe_score(const std::vector<Expert>& experts, const RigidMotion& m_b) {
  if (experts.empty()) throw Error(ErrorCode::EmptyModel, "no experts");
  double total = 0;
  for (const auto& e : experts) {
    double l = log_expert_conditional(e, m_b);
    if (l < kLogFloor) return -std::numeric_limits<double>::infinity();
    total += l;
  }
  return total;
}

std::vector<Prediction> predict(const std::vector<Expert>& experts,
                                const PredictConfig& cfg, Rng& rng) {
  if (experts.empty()) throw Error(ErrorCode::EmptyModel, "no experts");
  const Expert& robot = experts.front();
  const Bandwidths& bw = robot.model->density.bandwidths;

  // condition-weighted kernel mixture for seeding
  std::vector<double> seed_w(robot.log_alpha.size());
  for (std::size_t j = 0; j < seed_w.size(); ++j)
    seed_w[j] = std::exp(robot.log_alpha[j] - robot.log_denominator);

  auto draw_seed = [&](Rng& r) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(r);
    double acc = 0;
    std::size_t pick = seed_w.size() - 1;
    for (std::size_t j = 0; j < seed_w.size(); ++j) {
      acc += seed_w[j];
      if (u <= acc) {
        pick = j;
        break;
      }
    }
    RigidMotion m_v = robot.model->density.particles[pick].motion;
    m_v.p = sample_gaussian3(m_v.p, bw.sigma_m_p, r);
    m_v.q = sample_theta(m_v.q, bw.sigma_m_q, r);
    return local_to_object_motion(m_v, robot.h);
  };

  auto score = [&](const RigidMotion& m) { return poe_score(experts, m); };

  MotionProposal proposal;
  proposal.inner.translation_scale = bw.sigma_m_p;
  proposal.inner.rotation_scale = 0.1;
  proposal.inner.t0 = cfg.schedule.t0;

  std::vector<Prediction> pool;
  for (int c = 0; c < cfg.candidates; ++c) {
    RigidMotion best_seed;
    double best_seed_score = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < cfg.seeds; ++s) {
      RigidMotion m = draw_seed(rng);
      double sc = score(m);
      if (sc > best_seed_score) {
        best_seed_score = sc;
        best_seed = m;
      }
    }
    if (!std::isfinite(best_seed_score)) continue;  // all seeds vetoed
    auto [refined, refined_score] =
        anneal_maximize(score, best_seed, cfg.schedule, proposal, rng);
    pool.push_back(Prediction{refined, refined_score, 0});
  }
  if (pool.empty())
    throw Error(ErrorCode::AllVetoed, "every candidate was vetoed");

  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
    return a.log_likelihood > b.log_likelihood;
  });
  std::vector<Prediction> out;
  for (const auto& cand : pool) {
    bool duplicate = false;
    for (const auto& kept : out) {
      if ((cand.motion.p - kept.motion.p).norm() < cfg.dedup_translation &&
          orientation_distance(cand.motion.q, kept.motion.q) <
              cfg.dedup_rotation) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    out.push_back(cand);
    out.back().rank = static_cast<int>(out.size());
    if (static_cast<int>(out.size()) >= cfg.keep) break;
  }
  return out;
}

namespace {

using nlohmann::json;

}  // namespace

std::string motion_model_to_json(const MotionModel& model) {
  json j;
  j["format"] = "pushkit-motion-model";
  j["version"] = 1;
  j["action"] = model.action_id;
  j["kind"] = contact_kind_name(model.kind);
  j["density"] = json::parse(density_to_json(model.density));
  return j.dump();
}

MotionModel motion_model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad motion model: ") + e.what());
  }
  if (j.value("format", "") != "pushkit-motion-model")
    throw Error(ErrorCode::Io, "not a motion model document");
  MotionModel model;
  model.action_id = j.at("action");
  model.kind = contact_kind_from_name(j.at("kind").get<std::string>());
  model.density = density_from_json(j.at("density").dump());
  return model;
}

}  // namespace pushkit
