#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pushkit/contact.hpp"
#include "pushkit/error.hpp"

using namespace pushkit;

namespace {

// features on the plane x = 0, normals +x, spread along y
std::vector<SurfaceFeature> wall_features(int n, double spacing) {
  std::vector<SurfaceFeature> features;
  Eigen::Quaterniond q(Eigen::AngleAxisd(M_PI / 2,
                                         Eigen::Vector3d::UnitY()));
  for (int i = 0; i < n; ++i) {
    SurfaceFeature f;
    f.v = Pose(Eigen::Vector3d(0.0, (i - n / 2) * spacing, 0.1), q);
    f.r = Eigen::Vector2d(0.0, 0.0);
    features.push_back(f);
  }
  return features;
}

PointCloud plate_cloud(const Pose& link_pose, double width, double height) {
  PointCloud cloud;
  for (double y = -width / 2; y <= width / 2; y += 0.005)
    for (double z = -height / 2; z <= height / 2; z += 0.005)
      cloud.points.push_back(link_pose.p +
                             link_pose.q * Eigen::Vector3d(0, y, z));
  return cloud;
}

}  // namespace

TEST_CASE("robot-object model keeps only features near the plate") {
  auto features = wall_features(41, 0.01);  // y in [-0.2, 0.2]
  Pose link(Eigen::Vector3d(0.0, 0.0, 0.1),
            Eigen::Quaterniond(Eigen::AngleAxisd(M_PI,
                                                 Eigen::Vector3d::UnitZ())));
  PointCloud plate = plate_cloud(link, 0.1, 0.1);  // covers |y| <= 0.05
  Bandwidths bw;
  ContactModel model = learn_robot_object(features, link, plate, 0.01, bw);
  CHECK(model.kind == ContactKind::RobotObject);
  CHECK(model.cutoff == doctest::Approx(0.01));
  // only the features over the plate (plus cutoff margin) can contribute
  CHECK(model.density.particles.size() <= 13);
  CHECK(model.density.particles.size() >= 11);
  double total = 0;
  for (const auto& p : model.density.particles) total += p.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("contact particles reconstruct the link pose") {
  auto features = wall_features(21, 0.01);
  Pose link(Eigen::Vector3d(0.0, 0.0, 0.1),
            Eigen::Quaterniond(Eigen::AngleAxisd(M_PI,
                                                 Eigen::Vector3d::UnitZ())));
  PointCloud plate = plate_cloud(link, 0.3, 0.1);
  Bandwidths bw;
  ContactModel model = learn_robot_object(features, link, plate, 0.01, bw);
  // u_j = v_j^-1 o s, so every (feature, particle) pair with matching index
  // satisfies compose(v_j, u_j) = s. The model stores u_j; find for each
  // particle some feature reproducing the link pose.
  for (const auto& particle : model.density.particles) {
    bool found = false;
    for (const auto& f : features) {
      Pose s = compose(f.v, particle.pose);
      if ((s.p - link.p).norm() < 1e-9 &&
          orientation_distance(s.q, link.q) < 1e-9) {
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("zero-distance contact gets the top truncated-gaussian weight") {
  auto features = wall_features(21, 0.01);
  Pose link(Eigen::Vector3d(0.0, 0.0, 0.1),
            Eigen::Quaterniond(Eigen::AngleAxisd(M_PI,
                                                 Eigen::Vector3d::UnitZ())));
  PointCloud plate = plate_cloud(link, 0.3, 0.1);
  Bandwidths bw;
  ContactModel model = learn_robot_object(features, link, plate, 0.01, bw);
  double max_w = 0;
  for (const auto& p : model.density.particles)
    max_w = std::max(max_w, p.weight);
  // all features touch the plate (d ~ 0), weights near-uniform
  CHECK(max_w < 2.0 / model.density.particles.size());
}

TEST_CASE("no feature near the plate throws NoContact") {
  auto features = wall_features(11, 0.01);
  Pose link(Eigen::Vector3d(1.0, 0.0, 0.1), Eigen::Quaterniond::Identity());
  PointCloud plate = plate_cloud(link, 0.3, 0.1);
  Bandwidths bw;
  CHECK_THROWS_AS(learn_robot_object(features, link, plate, 0.01, bw),
                  Error);
}

TEST_CASE("object-environment model uses binary weights and ground frames") {
  std::vector<SurfaceFeature> features;
  for (int i = 0; i < 40; ++i) {
    SurfaceFeature f;
    double z = (i < 20) ? 0.01 : 0.5;  // half near ground, half far
    f.v = Pose(Eigen::Vector3d(0.01 * i, 0.0, z),
               Eigen::Quaterniond::Identity());
    features.push_back(f);
  }
  Bandwidths bw;
  Rng rng(1);
  ContactModel model =
      learn_object_environment(features, 0.0, 0.05, 40, bw, rng);
  CHECK(model.kind == ContactKind::ObjectEnvironment);
  REQUIRE(!model.density.particles.empty());
  CHECK(model.density.particles.size() <= 20);
  double w0 = model.density.particles.front().weight;
  for (const auto& p : model.density.particles) {
    CHECK(p.weight == doctest::Approx(w0).epsilon(1e-12));  // binary/uniform
    // u = e^-1 o v with e directly below v at ground height: x,y offsets 0
    CHECK(std::abs(p.pose.p.x()) < 1e-9);
    CHECK(std::abs(p.pose.p.y()) < 1e-9);
    CHECK(p.pose.p.z() <= 0.05 + 1e-9);
  }
}

TEST_CASE("contact model JSON round trip") {
  auto features = wall_features(21, 0.01);
  Pose link(Eigen::Vector3d(0.0, 0.0, 0.1),
            Eigen::Quaterniond(Eigen::AngleAxisd(M_PI,
                                                 Eigen::Vector3d::UnitZ())));
  PointCloud plate = plate_cloud(link, 0.3, 0.1);
  Bandwidths bw;
  ContactModel model = learn_robot_object(features, link, plate, 0.01, bw);
  ContactModel back = contact_model_from_json(contact_model_to_json(model));
  CHECK(back.kind == model.kind);
  CHECK(back.cutoff == doctest::Approx(model.cutoff));
  REQUIRE(back.density.particles.size() == model.density.particles.size());
  for (std::size_t i = 0; i < back.density.particles.size(); ++i) {
    CHECK((back.density.particles[i].pose.p -
           model.density.particles[i].pose.p)
              .norm() < 1e-12);
  }
}
