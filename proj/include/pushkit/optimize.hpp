#pragma once

#include <cmath>
#include <random>
#include <utility>

#include "pushkit/density.hpp"
#include "pushkit/error.hpp"
#include "pushkit/geom.hpp"

namespace pushkit {

struct AnnealSchedule {
  int iterations = 100;
  double t0 = 1.0;
  double tmin = 1e-3;

  void validate() const {
    if (iterations < 0 || tmin <= 0 || t0 < tmin)
      throw Error(ErrorCode::Unknown, "bad anneal schedule");
  }

  /// Geometric cooling T_k = T0 (Tmin/T0)^(k/iterations).
  double temperature(int k) const {
    if (iterations == 0) return t0;
    return t0 * std::pow(tmin / t0, static_cast<double>(k) / iterations);
  }
};

/// Simulated-annealing maximization. Keeps the best candidate seen;
/// accepts worse moves with probability exp(delta / T).
template <typename Candidate, typename Score, typename Proposal>
std::pair<Candidate, double> anneal_maximize(Score&& score,
                                             const Candidate& init,
                                             const AnnealSchedule& schedule,
                                             Proposal&& propose, Rng& rng) {
  schedule.validate();
  double current_score = score(init);
  if (!std::isfinite(current_score))
    throw Error(ErrorCode::NonFiniteScore, "non-finite score at init");
  Candidate current = init;
  Candidate best = init;
  double best_score = current_score;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int k = 0; k < schedule.iterations; ++k) {
    const double t = schedule.temperature(k);
    Candidate cand = propose(current, t, rng);
    const double s = score(cand);
    if (!std::isfinite(s) && s < 0) continue;  // -inf: reject outright
    const double delta = s - current_score;
    if (delta >= 0 || unif(rng) < std::exp(delta / t)) {
      current = std::move(cand);
      current_score = s;
      if (current_score > best_score) {
        best = current;
        best_score = current_score;
      }
    }
  }
  return {best, best_score};
}

/// Pose proposal: Gaussian translation plus small random-axis rotation,
/// both scaled by T / T0.
struct PoseProposal {
  double translation_scale = 0.02;  // meters at T = T0
  double rotation_scale = 0.2;      // radians at T = T0
  double t0 = 1.0;

  Pose operator()(const Pose& x, double t, Rng& rng) const {
    const double s = t / t0;
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d dp(n(rng), n(rng), n(rng));
    Eigen::Vector3d axis(n(rng), n(rng), n(rng));
    double angle = n(rng) * rotation_scale * s;
    if (axis.norm() < 1e-12) axis = Eigen::Vector3d::UnitZ();
    Eigen::Quaterniond dq(Eigen::AngleAxisd(angle, axis.normalized()));
    return Pose(x.p + translation_scale * s * dp, x.q * dq);
  }
};

/// Same perturbation for rigid motions.
struct MotionProposal {
  PoseProposal inner;

  RigidMotion operator()(const RigidMotion& m, double t, Rng& rng) const {
    Pose out = inner(Pose(m.p, m.q), t, rng);
    return RigidMotion(out.p, out.q);
  }
};

}  // namespace pushkit
