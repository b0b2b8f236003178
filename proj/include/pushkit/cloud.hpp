#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pushkit {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::optional<Eigen::Vector3d> view_origin;

  std::size_t size() const { return points.size(); }
};

PointCloud load_cloud_ply(const std::string& path);
PointCloud load_cloud_csv(const std::string& path);

/// Dispatch on file extension (.ply / .csv).
PointCloud load_cloud(const std::string& path);

void save_cloud_ply(const PointCloud& cloud, const std::string& path);

/// k nearest neighbours (by index) of query among cloud.points,
/// excluding nothing; brute force, adequate for desk-scale clouds.
std::vector<int> knn(const PointCloud& cloud, const Eigen::Vector3d& query,
                     int k);

}  // namespace pushkit
