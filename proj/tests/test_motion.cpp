#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pushkit/error.hpp"
#include "pushkit/motion.hpp"

using namespace pushkit;

namespace {

std::vector<MotionKernel> make_kernels(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<MotionKernel> kernels;
  for (int i = 0; i < n; ++i) {
    MotionKernel k;
    k.condition.u = Pose(Eigen::Vector3d(g(rng), g(rng), g(rng)),
                         sample_uniform_quaternion(rng));
    k.condition.r = Eigen::Vector2d(g(rng), g(rng));
    k.motion = RigidMotion(
        Eigen::Vector3d(0.3 + g(rng), g(rng), 0.0),
        Eigen::Quaterniond(Eigen::AngleAxisd(0.2 + g(rng),
                                             Eigen::Vector3d::UnitZ())));
    kernels.push_back(k);
  }
  return kernels;
}

}  // namespace

TEST_CASE("motion model stores uniform-weight joint kernels") {
  Rng rng(1);
  auto kernels = make_kernels(25, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("front-linear", ContactKind::RobotObject, kernels, bw);
  CHECK(model.density.kind == DensityKind::Joint);
  REQUIRE(model.density.particles.size() == 25);
  for (const auto& p : model.density.particles)
    CHECK(p.weight == doctest::Approx(1.0 / 25).epsilon(1e-12));
  CHECK_THROWS_AS(
      build_motion_model("x", ContactKind::RobotObject, {}, bw), Error);
}

TEST_CASE("expert conditional matches the brute-force double sum") {
  Rng rng(2);
  auto kernels = make_kernels(30, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("a", ContactKind::RobotObject, kernels, bw);
  FrameCondition c = kernels[7].condition;  // in-distribution condition
  Pose h(Eigen::Vector3d(0.1, -0.05, 0.0),
         Eigen::Quaterniond(Eigen::AngleAxisd(0.4,
                                              Eigen::Vector3d::UnitZ())));
  Expert expert = bind_expert(model, c, h);

  RigidMotion m_b(Eigen::Vector3d(0.28, 0.02, 0.0),
                  Eigen::Quaterniond(Eigen::AngleAxisd(
                      0.15, Eigen::Vector3d::UnitZ())));
  RigidMotion m_v = object_to_local_motion(m_b, h);
  double numer = 0, denom = 0;
  const double w = 1.0 / kernels.size();
  for (const auto& k : kernels) {
    double kc = w * eval_feature_kernel(c.u, c.r, k.condition.u,
                                        k.condition.r, bw);
    numer += kc * eval_motion_kernel(m_v, k.motion, bw);
    denom += kc;
  }
  double expected = std::log(numer / denom);
  CHECK(log_expert_conditional(expert, m_b) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("poe score sums expert conditionals and vetoes underflow") {
  Rng rng(3);
  auto kernels = make_kernels(15, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("a", ContactKind::RobotObject, kernels, bw);
  FrameCondition c = kernels[0].condition;
  Expert e1 = bind_expert(model, c, Pose::identity());
  Expert e2 = bind_expert(model, kernels[1].condition, Pose::identity());

  RigidMotion good = kernels[0].motion;
  double expected = log_expert_conditional(e1, good) +
                    log_expert_conditional(e2, good);
  CHECK(poe_score({e1, e2}, good) ==
        doctest::Approx(expected).epsilon(1e-12));

  // a motion far outside any kernel support drives the conditional to the
  // underflow floor and the product to -inf
  RigidMotion far(Eigen::Vector3d(50.0, 0, 0),
                  Eigen::Quaterniond::Identity());
  CHECK(poe_score({e1, e2}, far) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("binding to an alien condition throws UnsupportedCondition") {
  Rng rng(4);
  auto kernels = make_kernels(10, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("a", ContactKind::RobotObject, kernels, bw);
  FrameCondition alien;
  alien.u = Pose(Eigen::Vector3d(100.0, 0, 0),
                 Eigen::Quaterniond::Identity());
  alien.r = Eigen::Vector2d(500.0, -500.0);
  CHECK_THROWS_AS(bind_expert(model, alien, Pose::identity()), Error);
}

TEST_CASE("single-kernel model predicts its own motion at its own contact") {
  Bandwidths bw;
  MotionKernel k;
  k.condition.u = Pose(Eigen::Vector3d(0.02, 0.0, 0.1),
                       Eigen::Quaterniond(Eigen::AngleAxisd(
                           M_PI, Eigen::Vector3d::UnitZ())));
  k.condition.r = Eigen::Vector2d(0.0, 0.0);
  k.motion = RigidMotion(Eigen::Vector3d(0.35, 0.02, 0.0),
                         Eigen::Quaterniond(Eigen::AngleAxisd(
                             0.3, Eigen::Vector3d::UnitZ())));
  MotionModel model =
      build_motion_model("a", ContactKind::RobotObject, {k}, bw);
  Pose h(Eigen::Vector3d(-0.1, 0.0, 0.0),
         Eigen::Quaterniond(Eigen::AngleAxisd(0.5,
                                              Eigen::Vector3d::UnitZ())));
  Expert expert = bind_expert(model, k.condition, h);
  PredictConfig cfg;
  cfg.candidates = 20;
  cfg.seeds = 20;
  cfg.iterations = 60;
  cfg.schedule = AnnealSchedule{60, 1.0, 1e-2};
  Rng rng(5);
  auto predictions = predict({expert}, cfg, rng);
  REQUIRE(!predictions.empty());
  RigidMotion expected = local_to_object_motion(k.motion, h);
  CHECK((predictions.front().motion.p - expected.p).norm() < 0.01);
  CHECK(orientation_distance(predictions.front().motion.q, expected.q) <
        2.0 * M_PI / 180.0);
}

TEST_CASE("predictions are ranked and deduplicated") {
  Rng rng(6);
  auto kernels = make_kernels(20, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("a", ContactKind::RobotObject, kernels, bw);
  Expert expert =
      bind_expert(model, kernels[3].condition, Pose::identity());
  PredictConfig cfg;
  cfg.candidates = 30;
  cfg.seeds = 10;
  cfg.iterations = 30;
  cfg.schedule = AnnealSchedule{30, 1.0, 1e-2};
  Rng rng2(7);
  auto predictions = predict({expert}, cfg, rng2);
  REQUIRE(!predictions.empty());
  CHECK(predictions.size() <= 10);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    CHECK(predictions[i].rank == static_cast<int>(i) + 1);
    if (i > 0) {
      CHECK(predictions[i].log_likelihood <=
            predictions[i - 1].log_likelihood);
      bool distinct =
          (predictions[i].motion.p - predictions[i - 1].motion.p).norm() >=
              cfg.dedup_translation ||
          orientation_distance(predictions[i].motion.q,
                               predictions[i - 1].motion.q) >=
              cfg.dedup_rotation;
      CHECK(distinct);
    }
  }
}

TEST_CASE("motion model JSON round trip") {
  Rng rng(8);
  auto kernels = make_kernels(12, rng);
  Bandwidths bw;
  MotionModel model =
      build_motion_model("side-ang-10", ContactKind::ObjectEnvironment,
                         kernels, bw);
  MotionModel back = motion_model_from_json(motion_model_to_json(model));
  CHECK(back.action_id == model.action_id);
  CHECK(back.kind == model.kind);
  REQUIRE(back.density.particles.size() == model.density.particles.size());
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    CHECK((back.density.particles[i].motion.p -
           model.density.particles[i].motion.p)
              .norm() < 1e-12);
  }
}
