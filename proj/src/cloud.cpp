#include "pushkit/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

void check_finite(const PointCloud& cloud, const std::string& path) {
  for (const auto& p : cloud.points) {
    if (!p.allFinite())
      throw Error(ErrorCode::Io, "non-finite point in " + path);
  }
}

}  // namespace

PointCloud load_cloud_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);

  std::string line;
  std::size_t n_vertices = 0;
  bool in_header = true;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw Error(ErrorCode::Io, "not a PLY file: " + path);
  while (in_header && std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      ss >> what;
      if (what == "vertex") ss >> n_vertices;
    } else if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii")
        throw Error(ErrorCode::Io, "only ascii PLY supported: " + path);
    } else if (tok == "end_header") {
      in_header = false;
    }
  }
  if (in_header) throw Error(ErrorCode::Io, "truncated PLY header: " + path);

  PointCloud cloud;
  cloud.points.reserve(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    double x, y, z;
    if (!(in >> x >> y >> z))
      throw Error(ErrorCode::Io, "truncated PLY body: " + path);
    cloud.points.emplace_back(x, y, z);
  }
  check_finite(cloud, path);
  return cloud;
}

PointCloud load_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double x, y, z;
    if (!(ss >> x >> y >> z))
      throw Error(ErrorCode::Io, "bad CSV row in " + path + ": " + line);
    cloud.points.emplace_back(x, y, z);
  }
  check_finite(cloud, path);
  return cloud;
}

PointCloud load_cloud(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".ply") return load_cloud_ply(path);
  if (ext == ".csv") return load_cloud_csv(path);
  throw Error(ErrorCode::Io, "unknown cloud format: " + path);
}

void save_cloud_ply(const PointCloud& cloud, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
      << "end_header\n";
  out.precision(9);
  for (const auto& p : cloud.points)
    out << p.x() << " " << p.y() << " " << p.z() << "\n";
}

std::vector<int> knn(const PointCloud& cloud, const Eigen::Vector3d& query,
                     int k) {
  const int n = static_cast<int>(cloud.points.size());
  if (k > n)
    throw Error(ErrorCode::TooFewPoints,
                "knn: k exceeds cloud size");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](int a, int b) {
                      return (cloud.points[a] - query).squaredNorm() <
                             (cloud.points[b] - query).squaredNorm();
                    });
  idx.resize(k);
  return idx;
}

}  // namespace pushkit
