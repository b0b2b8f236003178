#include "pushkit/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

void check_unit(const Eigen::Quaterniond& q, const char* who) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::NonUnitQuaternion, who);
}

double quat_dot(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.coeffs().dot(b.coeffs());
}

}  // namespace

void Bandwidths::validate() const {
  if (sigma_p <= 0 || sigma_q <= 0 || sigma_r <= 0 || sigma_m_p <= 0 ||
      sigma_m_q <= 0)
    throw Error(ErrorCode::NonPositiveBandwidth, "bandwidths must be > 0");
}

Bandwidths Bandwidths::scaled(double factor) const {
  Bandwidths out = *this;
  out.sigma_p *= factor;
  out.sigma_r *= factor;
  out.sigma_m_p *= factor;
  // concentrations tighten as spatial bandwidths shrink
  out.sigma_q /= factor;
  out.sigma_m_q /= factor;
  return out;
}

void ParticleDensity::validate() const {
  if (particles.empty())
    throw Error(ErrorCode::EmptyModel, "density has no particles");
  bandwidths.validate();
  double sum = 0;
  for (const auto& p : particles) {
    if (p.weight < 0)
      throw Error(ErrorCode::Unknown, "negative particle weight");
    sum += p.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::Unknown, "particle weights do not sum to 1");
}

double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                    double sigma) {
  if (sigma <= 0)
    throw Error(ErrorCode::NonPositiveBandwidth, "gaussian sigma <= 0");
  const double n = static_cast<double>(x.size());
  const double d2 = (x - mu).squaredNorm();
  return -0.5 * d2 / (sigma * sigma) -
         0.5 * n * std::log(kTwoPi * sigma * sigma);
}

double eval_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                     double sigma) {
  return std::exp(log_gaussian(x, mu, sigma));
}

double log_vmf_normalizer(double kappa) {
  if (kappa <= 0)
    throw Error(ErrorCode::NonPositiveBandwidth, "vMF kappa <= 0");
  double log_i1;
  if (kappa < 500.0) {
    log_i1 = std::log(std::cyl_bessel_i(1.0, kappa));
  } else {
    // I_1(k) ~ e^k / sqrt(2 pi k) * (1 - 3/(8k))
    log_i1 = kappa - 0.5 * std::log(kTwoPi * kappa) +
             std::log1p(-3.0 / (8.0 * kappa));
  }
  return std::log(kappa) - 2.0 * std::log(kTwoPi) - log_i1;
}

double log_theta(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                 double kappa) {
  check_unit(q, "theta argument");
  check_unit(mu, "theta mean");
  const double dot = std::abs(quat_dot(q, mu));
  // log((e^{k d} + e^{-k d}) / 2) computed from the dominant term
  const double log_cosh = kappa * dot + std::log1p(std::exp(-2 * kappa * dot)) -
                          std::log(2.0);
  // the Bessel evaluation dominates kernel cost; bandwidths are constants
  // within a run, so a one-slot cache removes nearly all of it
  thread_local double cached_kappa = -1.0;
  thread_local double cached_log_c4 = 0.0;
  if (kappa != cached_kappa) {
    cached_log_c4 = log_vmf_normalizer(kappa);
    cached_kappa = kappa;
  }
  return cached_log_c4 + log_cosh;
}

double eval_theta(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                  double kappa) {
  return std::exp(log_theta(q, mu, kappa));
}

double log_feature_kernel(const Pose& v, const Eigen::Vector2d& r,
                          const Pose& mu_v, const Eigen::Vector2d& mu_r,
                          const Bandwidths& bw) {
  return log_gaussian(v.p, mu_v.p, bw.sigma_p) +
         log_theta(v.q, mu_v.q, bw.sigma_q) +
         log_gaussian(r, mu_r, bw.sigma_r);
}

double eval_feature_kernel(const Pose& v, const Eigen::Vector2d& r,
                           const Pose& mu_v, const Eigen::Vector2d& mu_r,
                           const Bandwidths& bw) {
  return std::exp(log_feature_kernel(v, r, mu_v, mu_r, bw));
}

double log_motion_kernel(const RigidMotion& m, const RigidMotion& mu,
                         const Bandwidths& bw) {
  return log_gaussian(m.p, mu.p, bw.sigma_m_p) +
         log_theta(m.q, mu.q, bw.sigma_m_q);
}

double eval_motion_kernel(const RigidMotion& m, const RigidMotion& mu,
                          const Bandwidths& bw) {
  return std::exp(log_motion_kernel(m, mu, bw));
}

double eval_density(const ParticleDensity& d, const Pose& v,
                    const Eigen::Vector2d& r) {
  if (d.kind != DensityKind::Feature)
    throw Error(ErrorCode::KindMismatch,
                "feature evaluation on non-feature density");
  double sum = 0;
  for (const auto& part : d.particles)
    sum += part.weight *
           eval_feature_kernel(v, r, part.pose, part.descriptor, d.bandwidths);
  return sum;
}

double eval_density(const ParticleDensity& d, const RigidMotion& m) {
  if (d.kind != DensityKind::Motion)
    throw Error(ErrorCode::KindMismatch,
                "motion evaluation on non-motion density");
  double sum = 0;
  for (const auto& part : d.particles)
    sum += part.weight * eval_motion_kernel(m, part.motion, d.bandwidths);
  return sum;
}

std::size_t sample_particle_index(const ParticleDensity& d, Rng& rng) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0;
  for (std::size_t j = 0; j < d.particles.size(); ++j) {
    acc += d.particles[j].weight;
    if (u <= acc) return j;
  }
  return d.particles.size() - 1;
}

Eigen::Vector3d sample_gaussian3(const Eigen::Vector3d& mu, double sigma,
                                 Rng& rng) {
  std::normal_distribution<double> n(0.0, sigma);
  return mu + Eigen::Vector3d(n(rng), n(rng), n(rng));
}

Eigen::Quaterniond sample_uniform_quaternion(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return canonical(q);
}

Eigen::Quaterniond sample_theta(const Eigen::Quaterniond& mu, double kappa,
                                Rng& rng) {
  check_unit(mu, "theta sampling mean");
  if (kappa <= 0)
    throw Error(ErrorCode::NonPositiveBandwidth, "vMF kappa <= 0");
  // Wood (1994) rejection sampling for vMF on S^{d-1}, d = 4.
  const double dim = 4.0;
  const double b =
      (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + (dim - 1) * (dim - 1))) /
      (dim - 1);
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + (dim - 1) * std::log(1.0 - x0 * x0);

  std::gamma_distribution<double> gamma((dim - 1) / 2.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double w = 0;
  for (;;) {
    double g1 = gamma(rng), g2 = gamma(rng);
    double zb = g1 / (g1 + g2);  // Beta((d-1)/2, (d-1)/2)
    w = (1.0 - (1.0 + b) * zb) / (1.0 - (1.0 - b) * zb);
    double u = unif(rng);
    if (kappa * w + (dim - 1) * std::log(1.0 - x0 * w) - c >= std::log(u))
      break;
  }
  // uniform direction orthogonal to mu in R^4
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d mu4 = mu.normalized().coeffs();
  Eigen::Vector4d v;
  do {
    v = Eigen::Vector4d(n(rng), n(rng), n(rng), n(rng));
    v -= v.dot(mu4) * mu4;
  } while (v.norm() < 1e-12);
  v.normalize();
  Eigen::Vector4d out4 = w * mu4 + std::sqrt(1.0 - w * w) * v;
  // antipodal pair: either mode with equal probability
  if (unif(rng) < 0.5) out4 = -out4;
  Eigen::Quaterniond q;
  q.coeffs() = out4;
  return canonical(q);
}

Particle sample_density(const ParticleDensity& d, Rng& rng) {
  d.validate();
  const Particle& center = d.particles[sample_particle_index(d, rng)];
  Particle out = center;
  out.weight = 1.0;
  const Bandwidths& bw = d.bandwidths;
  if (d.kind == DensityKind::Feature || d.kind == DensityKind::Joint) {
    out.pose.p = sample_gaussian3(center.pose.p, bw.sigma_p, rng);
    out.pose.q = sample_theta(center.pose.q, bw.sigma_q, rng);
    std::normal_distribution<double> nr(0.0, bw.sigma_r);
    out.descriptor = center.descriptor + Eigen::Vector2d(nr(rng), nr(rng));
  }
  if (d.kind == DensityKind::Motion || d.kind == DensityKind::Joint) {
    out.motion.p = sample_gaussian3(center.motion.p, bw.sigma_m_p, rng);
    out.motion.q = sample_theta(center.motion.q, bw.sigma_m_q, rng);
  }
  return out;
}

double logsumexp(const std::vector<double>& logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  double sum = 0;
  for (double l : logs) sum += std::exp(l - m);
  return m + std::log(sum);
}

// --- serialization --------------------------------------------------------

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

const char* kind_name(DensityKind k) {
  switch (k) {
    case DensityKind::Feature: return "feature";
    case DensityKind::Motion: return "motion";
    case DensityKind::Joint: return "joint";
  }
  return "feature";
}

DensityKind kind_from_name(const std::string& name) {
  if (name == "feature") return DensityKind::Feature;
  if (name == "motion") return DensityKind::Motion;
  if (name == "joint") return DensityKind::Joint;
  throw Error(ErrorCode::Io, "unknown density kind: " + name);
}

}  // namespace

std::string density_to_json(const ParticleDensity& d) {
  json j;
  j["format"] = "pushkit-density";
  j["version"] = 1;
  j["kind"] = kind_name(d.kind);
  j["bandwidths"] = {{"sigma_p", d.bandwidths.sigma_p},
                     {"sigma_q", d.bandwidths.sigma_q},
                     {"sigma_r", d.bandwidths.sigma_r},
                     {"sigma_m_p", d.bandwidths.sigma_m_p},
                     {"sigma_m_q", d.bandwidths.sigma_m_q}};
  json parts = json::array();
  for (const auto& p : d.particles) {
    json jp;
    jp["pose"] = pose_to_json(p.pose);
    jp["r"] = {p.descriptor.x(), p.descriptor.y()};
    jp["motion"] = pose_to_json(Pose(p.motion.p, p.motion.q));
    jp["w"] = p.weight;
    parts.push_back(std::move(jp));
  }
  j["particles"] = std::move(parts);
  return j.dump();
}

ParticleDensity density_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad density JSON: ") + e.what());
  }
  if (j.value("format", "") != "pushkit-density")
    throw Error(ErrorCode::Io, "not a density document");
  ParticleDensity d;
  d.kind = kind_from_name(j.at("kind").get<std::string>());
  const auto& bw = j.at("bandwidths");
  d.bandwidths.sigma_p = bw.at("sigma_p");
  d.bandwidths.sigma_q = bw.at("sigma_q");
  d.bandwidths.sigma_r = bw.at("sigma_r");
  d.bandwidths.sigma_m_p = bw.at("sigma_m_p");
  d.bandwidths.sigma_m_q = bw.at("sigma_m_q");
  for (const auto& jp : j.at("particles")) {
    Particle p;
    p.pose = pose_from_json(jp.at("pose"));
    p.descriptor = Eigen::Vector2d(jp.at("r")[0], jp.at("r")[1]);
    Pose m = pose_from_json(jp.at("motion"));
    p.motion = RigidMotion(m.p, m.q);
    p.weight = jp.at("w");
    d.particles.push_back(p);
  }
  d.validate();
  return d;
}

}  // namespace pushkit
