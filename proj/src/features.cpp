#include "pushkit/features.hpp"

#include <cmath>
#include <optional>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

constexpr double kRankEps = 1e-10;

// Deterministic sign: first component with magnitude above tolerance
// is made positive.
Eigen::Vector3d fix_sign(const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v[i]) > 1e-8) return v[i] > 0 ? v : Eigen::Vector3d(-v);
  }
  return v;
}

std::optional<Eigen::Vector3d> normal_at(const PointCloud& cloud, int idx,
                                         int k,
                                         const Eigen::Vector3d& centroid) {
  auto nn = knn(cloud, cloud.points[idx], k);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int j : nn) mean += cloud.points[j];
  mean /= static_cast<double>(nn.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int j : nn) {
    Eigen::Vector3d d = cloud.points[j] - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // collinear neighbourhood: only one significant eigenvalue
  if (es.eigenvalues()[1] <= kRankEps * std::max(1.0, es.eigenvalues()[2]))
    return std::nullopt;
  Eigen::Vector3d n = es.eigenvectors().col(0).normalized();
  Eigen::Vector3d outward = cloud.view_origin
                                ? (*cloud.view_origin - cloud.points[idx])
                                : (cloud.points[idx] - centroid);
  if (outward.norm() > 1e-12 && n.dot(outward) < 0) n = -n;
  return n;
}

std::optional<CurvatureEstimate> curvature_at(
    const PointCloud& cloud, int idx, const Eigen::Vector3d& normal, int k) {
  auto nn = knn(cloud, cloud.points[idx], k);
  // tangent basis
  Eigen::Vector3d t1 = normal.unitOrthogonal();
  Eigen::Vector3d t2 = normal.cross(t1);

  // quadric z = a x^2 + b xy + c y^2 + d x + e y + f in the tangent frame
  Eigen::MatrixXd A(nn.size(), 6);
  Eigen::VectorXd z(nn.size());
  for (std::size_t i = 0; i < nn.size(); ++i) {
    Eigen::Vector3d d = cloud.points[nn[i]] - cloud.points[idx];
    double x = d.dot(t1), y = d.dot(t2);
    A.row(i) << x * x, x * y, y * y, x, y, 1.0;
    z[i] = d.dot(normal);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-8);
  if (qr.rank() < 6) return std::nullopt;
  Eigen::VectorXd coef = qr.solve(z);

  double fx = coef[3], fy = coef[4];
  double fxx = 2 * coef[0], fxy = coef[1], fyy = 2 * coef[2];
  double w = std::sqrt(1 + fx * fx + fy * fy);
  Eigen::Matrix2d first;
  first << 1 + fx * fx, fx * fy, fx * fy, 1 + fy * fy;
  Eigen::Matrix2d second;
  second << fxx / w, fxy / w, fxy / w, fyy / w;
  // graph convention has convex-outward surfaces curving away from the
  // outward normal; negate so convex curvature is positive
  Eigen::Matrix2d shape = -second * first.inverse();

  Eigen::EigenSolver<Eigen::Matrix2d> es(shape);
  double l0 = es.eigenvalues()[0].real();
  double l1 = es.eigenvalues()[1].real();
  Eigen::Vector2d d0 = es.eigenvectors().col(0).real();
  Eigen::Vector2d d1 = es.eigenvectors().col(1).real();
  if (l0 < l1) {
    std::swap(l0, l1);
    std::swap(d0, d1);
  }
  Eigen::Vector3d k1_dir = (d0[0] * t1 + d0[1] * t2);
  // keep k1 exactly in the tangent plane of the estimated normal
  k1_dir -= k1_dir.dot(normal) * normal;
  if (k1_dir.norm() < 1e-12) return std::nullopt;
  CurvatureEstimate out;
  out.k1 = fix_sign(k1_dir.normalized());
  out.r = Eigen::Vector2d(l0, l1);
  return out;
}

Eigen::Vector3d cloud_centroid(const PointCloud& cloud) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) c += p;
  return c / static_cast<double>(cloud.points.size());
}

}  // namespace

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud,
                                              int k) {
  if (k < 3) throw Error(ErrorCode::TooFewPoints, "normals need k >= 3");
  if (static_cast<int>(cloud.size()) < k)
    throw Error(ErrorCode::TooFewPoints, "cloud smaller than k");
  Eigen::Vector3d centroid = cloud_centroid(cloud);
  std::vector<Eigen::Vector3d> normals;
  normals.reserve(cloud.size());
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
    auto n = normal_at(cloud, i, k, centroid);
    if (!n)
      throw Error(ErrorCode::DegenerateNeighborhood,
                  "collinear neighbourhood at point " + std::to_string(i));
    normals.push_back(*n);
  }
  return normals;
}

std::vector<CurvatureEstimate> estimate_curvatures(
    const PointCloud& cloud, const std::vector<Eigen::Vector3d>& normals,
    int k) {
  if (k < 5) throw Error(ErrorCode::TooFewPoints, "curvatures need k >= 5");
  if (static_cast<int>(cloud.size()) < k)
    throw Error(ErrorCode::TooFewPoints, "cloud smaller than k");
  std::vector<CurvatureEstimate> out;
  out.reserve(cloud.size());
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
    auto c = curvature_at(cloud, i, normals[i], k);
    if (!c)
      throw Error(ErrorCode::DegenerateNeighborhood,
                  "rank-deficient quadric fit at point " + std::to_string(i));
    out.push_back(*c);
  }
  return out;
}

std::vector<SurfaceFeature> build_features(const PointCloud& cloud, int k) {
  if (k < 5) throw Error(ErrorCode::TooFewPoints, "features need k >= 5");
  if (static_cast<int>(cloud.size()) < std::max(k, 4))
    throw Error(ErrorCode::TooFewPoints, "cloud smaller than k");
  Eigen::Vector3d centroid = cloud_centroid(cloud);
  std::vector<SurfaceFeature> features;
  features.reserve(cloud.size());
  for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
    auto n = normal_at(cloud, i, k, centroid);
    if (!n) continue;
    auto c = curvature_at(cloud, i, *n, k);
    if (!c) continue;
    Eigen::Matrix3d rot;
    rot.col(0) = c->k1;
    rot.col(2) = *n;
    rot.col(1) = n->cross(c->k1);
    SurfaceFeature f;
    f.v = Pose(cloud.points[i], Eigen::Quaterniond(rot));
    f.r = c->r;
    features.push_back(f);
  }
  return features;
}

}  // namespace pushkit
