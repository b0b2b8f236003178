#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pushkit/density.hpp"
#include "pushkit/error.hpp"

using namespace pushkit;

namespace {

Eigen::Quaterniond random_quat(Rng& rng) {
  return sample_uniform_quaternion(rng);
}

ParticleDensity random_feature_density(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 0.1);
  ParticleDensity d;
  d.kind = DensityKind::Feature;
  std::vector<double> w(n);
  double total = 0;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (auto& x : w) {
    x = u(rng);
    total += x;
  }
  for (int i = 0; i < n; ++i) {
    Particle p;
    p.pose = Pose(Eigen::Vector3d(g(rng), g(rng), g(rng)), random_quat(rng));
    p.descriptor = Eigen::Vector2d(g(rng), g(rng));
    p.weight = w[i] / total;
    d.particles.push_back(p);
  }
  return d;
}

}  // namespace

TEST_CASE("gaussian kernel matches the closed form") {
  Eigen::VectorXd x(3), mu(3);
  x << 0.1, -0.2, 0.05;
  mu << 0.0, 0.0, 0.0;
  double sigma = 0.1;
  double expected = std::exp(-x.squaredNorm() / (2 * sigma * sigma)) /
                    std::pow(2 * M_PI * sigma * sigma, 1.5);
  CHECK(eval_gaussian(x, mu, sigma) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_gaussian(x, mu, sigma) ==
        doctest::Approx(std::log(expected)).epsilon(1e-12));
}

TEST_CASE("theta is antipodal symmetric and peaks at the mean") {
  Rng rng(3);
  Eigen::Quaterniond mu = random_quat(rng);
  Eigen::Quaterniond anti(-mu.w(), -mu.x(), -mu.y(), -mu.z());
  double kappa = 80.0;
  CHECK(eval_theta(mu, mu, kappa) ==
        doctest::Approx(eval_theta(anti, mu, kappa)).epsilon(1e-12));
  Eigen::Quaterniond other = random_quat(rng);
  CHECK(eval_theta(mu, mu, kappa) >= eval_theta(other, mu, kappa));
}

TEST_CASE("theta Monte Carlo normalization within 2%") {
  // uniform S^3 samples: E[theta] * area(S^3) should be 1
  Rng rng(4);
  const double kappa = 50.0;
  Eigen::Quaterniond mu = random_quat(rng);
  const int n = 200000;
  double acc = 0;
  for (int i = 0; i < n; ++i)
    acc += eval_theta(random_quat(rng), mu, kappa);
  double integral = acc / n * 2.0 * M_PI * M_PI;  // area of unit S^3
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("vmf normalizer is continuous at the asymptotic switch") {
  double below = log_vmf_normalizer(499.9);
  double above = log_vmf_normalizer(500.1);
  CHECK(std::abs(below - above) < 1e-3);
}

TEST_CASE("eval_density matches brute force on 100 particles") {
  Rng rng(5);
  ParticleDensity d = random_feature_density(100, rng);
  Pose v(Eigen::Vector3d(0.02, 0.01, -0.03), random_quat(rng));
  Eigen::Vector2d r(0.5, -0.2);
  double brute = 0;
  for (const auto& p : d.particles)
    brute += p.weight *
             eval_feature_kernel(v, r, p.pose, p.descriptor, d.bandwidths);
  CHECK(eval_density(d, v, r) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("motion density matches brute force") {
  Rng rng(6);
  ParticleDensity d = random_feature_density(50, rng);
  d.kind = DensityKind::Motion;
  RigidMotion m(Eigen::Vector3d(0.01, 0.0, 0.0), random_quat(rng));
  double brute = 0;
  for (const auto& p : d.particles)
    brute += p.weight * eval_motion_kernel(m, p.motion, d.bandwidths);
  CHECK(eval_density(d, m) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("kind mismatch throws") {
  Rng rng(7);
  ParticleDensity d = random_feature_density(10, rng);
  CHECK_THROWS_AS(eval_density(d, RigidMotion::identity()), Error);
}

TEST_CASE("non-positive bandwidth rejected") {
  Bandwidths bw;
  bw.sigma_p = 0.0;
  CHECK_THROWS_AS(bw.validate(), Error);
  CHECK_THROWS_AS(log_vmf_normalizer(-1.0), Error);
}

TEST_CASE("sample_theta concentrates near the mean") {
  Rng rng(8);
  Eigen::Quaterniond mu = random_quat(rng);
  double kappa = 400.0;
  double mean_dot = 0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    Eigen::Quaterniond s = sample_theta(mu, kappa, rng);
    CHECK(std::abs(s.norm() - 1.0) < 1e-9);
    mean_dot += std::abs(s.coeffs().dot(mu.coeffs()));
  }
  mean_dot /= n;
  CHECK(mean_dot > 0.99);  // tight concentration at kappa = 400
}

TEST_CASE("sample_particle_index follows the weights") {
  ParticleDensity d;
  d.kind = DensityKind::Feature;
  for (int i = 0; i < 3; ++i) {
    Particle p;
    p.weight = (i == 1) ? 0.8 : 0.1;
    d.particles.push_back(p);
  }
  Rng rng(9);
  int hits = 0;
  const int n = 5000;
  for (int i = 0; i < n; ++i)
    if (sample_particle_index(d, rng) == 1) ++hits;
  CHECK(hits > static_cast<int>(0.7 * n));
}

TEST_CASE("logsumexp is stable and exact") {
  CHECK(logsumexp({std::log(2.0), std::log(3.0)}) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(logsumexp({-1000.0, -1000.0}) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("density JSON round trip") {
  Rng rng(10);
  ParticleDensity d = random_feature_density(20, rng);
  ParticleDensity back = density_from_json(density_to_json(d));
  REQUIRE(back.particles.size() == d.particles.size());
  CHECK(back.kind == d.kind);
  for (std::size_t i = 0; i < d.particles.size(); ++i) {
    CHECK((back.particles[i].pose.p - d.particles[i].pose.p).norm() < 1e-12);
    CHECK(back.particles[i].weight ==
          doctest::Approx(d.particles[i].weight).epsilon(1e-12));
  }
  CHECK_THROWS_AS(density_from_json("{\"format\":\"other\"}"), Error);
}
