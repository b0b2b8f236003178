#include "pushkit/query.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

// log pose-kernel without the descriptor factor
double log_pose_kernel(const Pose& x, const Pose& mu, const Bandwidths& bw) {
  return log_gaussian(x.p, mu.p, bw.sigma_p) +
         log_theta(x.q, mu.q, bw.sigma_q);
}

std::size_t weighted_draw(const std::vector<double>& weights, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    acc += weights[j];
    if (u <= acc) return j;
  }
  return weights.size() - 1;
}

}  // namespace

QueryDensity build_query_density(const ContactModel& model,
                                 const std::vector<SurfaceFeature>& features,
                                 int k_q, Rng& rng) {
  if (model.density.particles.empty())
    throw Error(ErrorCode::EmptyModel, "empty contact model");
  if (features.empty())
    throw Error(ErrorCode::EmptyFeatures, "no object features");
  if (k_q < 1) throw Error(ErrorCode::Config, "K_Q must be >= 1");

  QueryDensity q;
  q.kind = model.kind;
  q.bandwidths = model.density.bandwidths;

  std::uniform_int_distribution<std::size_t> feat_draw(0, features.size() - 1);
  std::vector<double> log_w(k_q);
  for (int k = 0; k < k_q; ++k) {
    const SurfaceFeature& f = features[feat_draw(rng)];
    std::size_t i = sample_particle_index(model.density, rng);
    const Particle& u_part = model.density.particles[i];
    QueryParticle p;
    p.v = f.v;
    p.r = f.r;
    p.s = compose(f.v, u_part.pose);
    log_w[k] =
        log_gaussian(f.r, u_part.descriptor, model.density.bandwidths.sigma_r);
    q.particles.push_back(p);
  }
  double norm = logsumexp(log_w);
  if (!std::isfinite(norm))
    throw Error(ErrorCode::EmptyModel, "all query weights underflowed");
  for (int k = 0; k < k_q; ++k)
    q.particles[k].weight = std::exp(log_w[k] - norm);
  return q;
}

double eval_link_pose_marginal(const QueryDensity& q, const Pose& s) {
  double sum = 0;
  for (const auto& p : q.particles)
    sum += p.weight * std::exp(log_pose_kernel(s, p.s, q.bandwidths));
  return sum;
}

double eval_frame_marginal(const QueryDensity& q, const Pose& v) {
  double sum = 0;
  for (const auto& p : q.particles)
    sum += p.weight * std::exp(log_pose_kernel(v, p.v, q.bandwidths));
  return sum;
}

Pose sample_link_pose(const QueryDensity& q, Rng& rng) {
  if (q.particles.empty())
    throw Error(ErrorCode::EmptyModel, "empty query density");
  std::vector<double> w(q.particles.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = q.particles[j].weight;
  const QueryParticle& p = q.particles[weighted_draw(w, rng)];
  Pose out;
  out.p = sample_gaussian3(p.s.p, q.bandwidths.sigma_p, rng);
  out.q = sample_theta(p.s.q, q.bandwidths.sigma_q, rng);
  return out;
}

Pose sample_link_pose_feasible(const QueryDensity& q,
                               const std::function<bool(const Pose&)>& ok,
                               Rng& rng, int max_tries) {
  for (int t = 0; t < max_tries; ++t) {
    Pose s = sample_link_pose(q, rng);
    if (ok(s)) return s;
  }
  throw Error(ErrorCode::NoContact, "no feasible link pose found");
}

ContactFrame select_contact_frame(const QueryDensity& q,
                                  const AnnealSchedule& schedule, Rng& rng,
                                  const Pose* link_pose) {
  if (q.particles.empty())
    throw Error(ErrorCode::EmptyModel, "empty query density");

  // per-particle log weights, folding in consistency with the chosen
  // link pose when given (conditioning Q(v | s))
  std::vector<double> log_w(q.particles.size());
  for (std::size_t j = 0; j < q.particles.size(); ++j) {
    const auto& p = q.particles[j];
    log_w[j] = std::log(std::max(p.weight, 1e-300));
    if (link_pose) log_w[j] += log_pose_kernel(*link_pose, p.s, q.bandwidths);
  }

  auto score = [&](const Pose& v) {
    std::vector<double> terms(q.particles.size());
    for (std::size_t j = 0; j < q.particles.size(); ++j)
      terms[j] = log_w[j] + log_pose_kernel(v, q.particles[j].v, q.bandwidths);
    return logsumexp(terms);
  };

  // start from the best particle centre
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.particles.size(); ++j) {
    double s = score(q.particles[j].v);
    if (s > best_score) {
      best_score = s;
      best = j;
    }
  }

  PoseProposal proposal;
  proposal.translation_scale = 2 * q.bandwidths.sigma_p;
  proposal.rotation_scale = 0.1;
  proposal.t0 = schedule.t0;
  auto [v_best, s_best] =
      anneal_maximize(score, q.particles[best].v, schedule, proposal, rng);
  (void)s_best;

  // nearest particle provides the curvature descriptor and, absent an
  // explicit link pose, the body pose s
  std::size_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < q.particles.size(); ++j) {
    double d = (q.particles[j].v.p - v_best.p).squaredNorm();
    if (d < nearest_d) {
      nearest_d = d;
      nearest = j;
    }
  }
  ContactFrame out;
  out.v = v_best;
  out.condition.r = q.particles[nearest].r;
  Pose s_pose = link_pose ? *link_pose : q.particles[nearest].s;
  out.condition.u = relative_pose(v_best, s_pose);
  return out;
}

std::vector<ContactFrame> sample_env_frames(const QueryDensity& q, int n_e,
                                            Rng& rng) {
  if (n_e < 0) throw Error(ErrorCode::Config, "negative N_E");
  std::vector<ContactFrame> out;
  if (n_e == 0) return out;
  if (q.particles.empty())
    throw Error(ErrorCode::EmptyModel, "empty query density");
  std::vector<double> w(q.particles.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = q.particles[j].weight;
  std::normal_distribution<double> nr(0.0, q.bandwidths.sigma_r);
  for (int k = 0; k < n_e; ++k) {
    const QueryParticle& p = q.particles[weighted_draw(w, rng)];
    ContactFrame f;
    f.v.p = sample_gaussian3(p.v.p, q.bandwidths.sigma_p, rng);
    f.v.q = sample_theta(p.v.q, q.bandwidths.sigma_q, rng);
    f.condition.u = relative_pose(p.v, p.s);
    f.condition.r = p.r + Eigen::Vector2d(nr(rng), nr(rng));
    out.push_back(f);
  }
  return out;
}

namespace {

using nlohmann::json;

json pose_to_json(const Pose& v) {
  return json{{"p", {v.p.x(), v.p.y(), v.p.z()}},
              {"q", {v.q.w(), v.q.x(), v.q.y(), v.q.z()}}};
}

Pose pose_from_json(const json& j) {
  auto p = j.at("p");
  auto q = j.at("q");
  return Pose(Eigen::Vector3d(p[0], p[1], p[2]),
              Eigen::Quaterniond(q[0], q[1], q[2], q[3]));
}

}  // namespace

std::string query_density_to_json(const QueryDensity& q) {
  json j;
  j["format"] = "pushkit-query-density";
  j["version"] = 1;
  j["kind"] = contact_kind_name(q.kind);
  j["bandwidths"] = {{"sigma_p", q.bandwidths.sigma_p},
                     {"sigma_q", q.bandwidths.sigma_q},
                     {"sigma_r", q.bandwidths.sigma_r},
                     {"sigma_m_p", q.bandwidths.sigma_m_p},
                     {"sigma_m_q", q.bandwidths.sigma_m_q}};
  json parts = json::array();
  for (const auto& p : q.particles) {
    parts.push_back(json{{"s", pose_to_json(p.s)},
                         {"v", pose_to_json(p.v)},
                         {"r", {p.r.x(), p.r.y()}},
                         {"w", p.weight}});
  }
  j["particles"] = std::move(parts);
  return j.dump();
}

QueryDensity query_density_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad query density: ") + e.what());
  }
  if (j.value("format", "") != "pushkit-query-density")
    throw Error(ErrorCode::Io, "not a query density document");
  QueryDensity q;
  q.kind = contact_kind_from_name(j.at("kind").get<std::string>());
  const auto& bw = j.at("bandwidths");
  q.bandwidths.sigma_p = bw.at("sigma_p");
  q.bandwidths.sigma_q = bw.at("sigma_q");
  q.bandwidths.sigma_r = bw.at("sigma_r");
  q.bandwidths.sigma_m_p = bw.at("sigma_m_p");
  q.bandwidths.sigma_m_q = bw.at("sigma_m_q");
  for (const auto& jp : j.at("particles")) {
    QueryParticle p;
    p.s = pose_from_json(jp.at("s"));
    p.v = pose_from_json(jp.at("v"));
    p.r = Eigen::Vector2d(jp.at("r")[0], jp.at("r")[1]);
    p.weight = jp.at("w");
    q.particles.push_back(p);
  }
  return q;
}

}  // namespace pushkit
