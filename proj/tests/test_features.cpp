#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pushkit/error.hpp"
#include "pushkit/features.hpp"

using namespace pushkit;

namespace {

// ~1e4 points/m^2 grids/surfaces, matching the stated oracle density

PointCloud make_plane(double side, double spacing) {
  PointCloud cloud;
  for (double x = -side / 2; x <= side / 2; x += spacing)
    for (double y = -side / 2; y <= side / 2; y += spacing)
      cloud.points.emplace_back(x, y, 0.0);
  cloud.view_origin = Eigen::Vector3d(0, 0, 1.0);
  return cloud;
}

PointCloud make_cylinder(double radius, double height, double spacing) {
  PointCloud cloud;
  int n_theta = static_cast<int>(std::ceil(2 * M_PI * radius / spacing));
  for (int i = 0; i < n_theta; ++i) {
    double th = 2 * M_PI * i / n_theta;
    for (double z = -height / 2; z <= height / 2; z += spacing) {
      cloud.points.emplace_back(radius * std::cos(th), radius * std::sin(th),
                                z);
    }
  }
  return cloud;  // no view origin: normals oriented away from centroid
}

PointCloud make_sphere(double radius, int n) {
  // Fibonacci sphere
  PointCloud cloud;
  const double ga = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / n;
    double rho = std::sqrt(1.0 - z * z);
    double th = ga * i;
    cloud.points.emplace_back(radius * rho * std::cos(th),
                              radius * rho * std::sin(th), radius * z);
  }
  return cloud;
}

}  // namespace

TEST_CASE("plane normals point toward the view origin") {
  PointCloud cloud = make_plane(0.4, 0.01);
  auto normals = estimate_normals(cloud, 12);
  REQUIRE(normals.size() == cloud.size());
  for (const auto& n : normals) {
    CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(n.z() > 0.99);
  }
}

TEST_CASE("plane curvature is zero") {
  PointCloud cloud = make_plane(0.4, 0.01);
  auto normals = estimate_normals(cloud, 12);
  auto curv = estimate_curvatures(cloud, normals, 12);
  for (const auto& c : curv) {
    CHECK(std::abs(c.r.x()) < 0.05);
    CHECK(std::abs(c.r.y()) < 0.05);
    CHECK(c.r.x() >= c.r.y());
  }
}

TEST_CASE("cylinder curvature matches 1/R within 5%") {
  const double R = 0.1;
  PointCloud cloud = make_cylinder(R, 0.3, 0.008);
  auto normals = estimate_normals(cloud, 14);
  auto curv = estimate_curvatures(cloud, normals, 14);
  int checked = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (std::abs(cloud.points[i].z()) > 0.1) continue;  // away from rims
    CHECK(curv[i].r.x() == doctest::Approx(1.0 / R).epsilon(0.05));
    CHECK(std::abs(curv[i].r.y()) < 0.05 / R);
    // principal direction is tangential, perpendicular to the axis
    CHECK(std::abs(curv[i].k1.z()) < 0.1);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("sphere curvature matches 1/R within 5% and is convex-positive") {
  const double R = 0.1;
  PointCloud cloud = make_sphere(R, 1500);
  auto normals = estimate_normals(cloud, 14);
  auto curv = estimate_curvatures(cloud, normals, 14);
  for (const auto& c : curv) {
    CHECK(c.r.x() == doctest::Approx(1.0 / R).epsilon(0.05));
    CHECK(c.r.y() == doctest::Approx(1.0 / R).epsilon(0.05));
  }
}

TEST_CASE("sphere normals point outward") {
  PointCloud cloud = make_sphere(0.1, 800);
  auto normals = estimate_normals(cloud, 12);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(normals[i].dot(cloud.points[i].normalized()) > 0.9);
}

TEST_CASE("feature frames are right-handed with z = normal") {
  PointCloud cloud = make_cylinder(0.1, 0.3, 0.01);
  auto features = build_features(cloud, 14);
  REQUIRE(!features.empty());
  for (const auto& f : features) {
    Eigen::Matrix3d rot = f.v.q.toRotationMatrix();
    CHECK(rot.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(f.r.x() >= f.r.y());
  }
}

TEST_CASE("too few points throws") {
  PointCloud cloud;
  cloud.points = {{0, 0, 0}, {1, 0, 0}};
  CHECK_THROWS_AS(estimate_normals(cloud, 10), Error);
}

TEST_CASE("collinear neighbourhood throws") {
  PointCloud cloud;
  for (int i = 0; i < 30; ++i) cloud.points.emplace_back(0.01 * i, 0, 0);
  CHECK_THROWS_AS(estimate_normals(cloud, 10), Error);
}
