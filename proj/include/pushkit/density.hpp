#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pushkit/features.hpp"
#include "pushkit/geom.hpp"

namespace pushkit {

using Rng = std::mt19937_64;

/// Kernel bandwidths. Orientation bandwidths are von Mises-Fisher
/// concentrations (larger = tighter).
struct Bandwidths {
  double sigma_p = 0.01;    // position, meters
  double sigma_q = 100.0;   // orientation concentration
  double sigma_r = 10.0;    // curvature descriptor, 1/meters
  double sigma_m_p = 0.02;  // motion translation, meters
  double sigma_m_q = 200.0; // motion rotation concentration

  void validate() const;
  Bandwidths scaled(double factor) const;
};

enum class DensityKind { Feature, Motion, Joint };

/// One kernel centre. Feature densities use pose + descriptor; motion
/// densities use motion; joint densities (motion models) use all three.
struct Particle {
  Pose pose;
  Eigen::Vector2d descriptor{Eigen::Vector2d::Zero()};
  RigidMotion motion;
  double weight = 0.0;
};

struct ParticleDensity {
  DensityKind kind = DensityKind::Feature;
  std::vector<Particle> particles;
  Bandwidths bandwidths;

  void validate() const;  // weights sum to 1, non-empty
};

// --- scalar kernels -------------------------------------------------------

/// Isotropic n-variate Gaussian with per-axis standard deviation sigma,
/// normalization included.
double eval_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                     double sigma);
double log_gaussian(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                    double sigma);

/// Pair of antipodal von Mises-Fisher distributions on S^3:
/// Theta(q|mu,kappa) = C4(kappa) * (exp(kappa q.mu) + exp(-kappa q.mu)) / 2.
double eval_theta(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                  double kappa);
double log_theta(const Eigen::Quaterniond& q, const Eigen::Quaterniond& mu,
                 double kappa);

/// log of the S^3 vMF normalizer C4(kappa) = kappa / ((2 pi)^2 I_1(kappa)).
double log_vmf_normalizer(double kappa);

// --- composite kernels ----------------------------------------------------

double eval_feature_kernel(const Pose& v, const Eigen::Vector2d& r,
                           const Pose& mu_v, const Eigen::Vector2d& mu_r,
                           const Bandwidths& bw);
double log_feature_kernel(const Pose& v, const Eigen::Vector2d& r,
                          const Pose& mu_v, const Eigen::Vector2d& mu_r,
                          const Bandwidths& bw);

double eval_motion_kernel(const RigidMotion& m, const RigidMotion& mu,
                          const Bandwidths& bw);
double log_motion_kernel(const RigidMotion& m, const RigidMotion& mu,
                         const Bandwidths& bw);

// --- densities ------------------------------------------------------------

double eval_density(const ParticleDensity& d, const Pose& v,
                    const Eigen::Vector2d& r);
double eval_density(const ParticleDensity& d, const RigidMotion& m);

/// Weighted particle draw followed by kernel perturbation.
Particle sample_density(const ParticleDensity& d, Rng& rng);

/// Index draw by particle weight.
std::size_t sample_particle_index(const ParticleDensity& d, Rng& rng);

// --- sampling primitives --------------------------------------------------

Eigen::Vector3d sample_gaussian3(const Eigen::Vector3d& mu, double sigma,
                                 Rng& rng);

/// von Mises-Fisher draw on S^3 (Wood's rejection algorithm) with a
/// random antipodal flip, matching the Theta kernel.
Eigen::Quaterniond sample_theta(const Eigen::Quaterniond& mu, double kappa,
                                Rng& rng);

Eigen::Quaterniond sample_uniform_quaternion(Rng& rng);

double logsumexp(const std::vector<double>& logs);

// --- serialization --------------------------------------------------------

std::string density_to_json(const ParticleDensity& d);
ParticleDensity density_from_json(const std::string& json);

}  // namespace pushkit
