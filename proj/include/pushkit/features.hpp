#pragma once

#include <vector>

#include "pushkit/cloud.hpp"
#include "pushkit/geom.hpp"

namespace pushkit {

/// Oriented surface point: frame (z = normal, x = direction of highest
/// curvature) plus principal curvature descriptor r = (r1, r2), r1 >= r2.
struct SurfaceFeature {
  Pose v;
  Eigen::Vector2d r{Eigen::Vector2d::Zero()};
};

struct CurvatureEstimate {
  Eigen::Vector3d k1;    // direction of highest curvature, in tangent plane
  Eigen::Vector2d r;     // curvatures along k1 and its perpendicular
};

/// PCA normals from the k nearest neighbours of each point, oriented
/// toward the view origin when available, else away from the centroid.
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k);

/// Principal curvatures by quadric fit in the tangent frame of each point.
std::vector<CurvatureEstimate> estimate_curvatures(
    const PointCloud& cloud, const std::vector<Eigen::Vector3d>& normals,
    int k);

/// Full feature extraction; degenerate points are skipped.
std::vector<SurfaceFeature> build_features(const PointCloud& cloud,
                                           int k = 20);

}  // namespace pushkit
