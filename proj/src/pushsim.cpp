#include "pushkit/pushsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pushkit/error.hpp"

namespace pushkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Seg {
  bool arc = false;
  Eigen::Vector2d a, b;         // endpoints, CCW
  Eigen::Vector2d center;       // arc only
  double radius = 0.0;          // arc only
  double ang0 = 0.0, ang1 = 0.0;  // arc only, ang1 > ang0
};

std::vector<Seg> rectangle_outline(double lx, double ly) {
  const double hx = lx / 2, hy = ly / 2;
  std::vector<Eigen::Vector2d> v{{hx, -hy}, {hx, hy}, {-hx, hy}, {-hx, -hy}};
  std::vector<Seg> segs;
  for (int i = 0; i < 4; ++i) {
    Seg s;
    s.a = v[i];
    s.b = v[(i + 1) % 4];
    segs.push_back(s);
  }
  return segs;
}

std::vector<Eigen::Vector2d> equilateral_vertices(double side) {
  const double rc = side / std::sqrt(3.0);
  std::vector<Eigen::Vector2d> v;
  for (int i = 0; i < 3; ++i) {
    double ang = kPi / 2 + i * 2 * kPi / 3;
    v.emplace_back(rc * std::cos(ang), rc * std::sin(ang));
  }
  return v;
}

std::vector<Seg> triangle_outline(double side) {
  auto v = equilateral_vertices(side);
  std::vector<Seg> segs;
  for (int i = 0; i < 3; ++i) {
    Seg s;
    s.a = v[i];
    s.b = v[(i + 1) % 3];
    segs.push_back(s);
  }
  return segs;
}

// Equilateral triangle with the corner at vertex 0 replaced by a fillet
// arc of the given radius, tangent to both adjacent edges.
std::vector<Seg> rounded_triangle_outline(double side, double fillet) {
  auto v = equilateral_vertices(side);
  const Eigen::Vector2d p = v[0];
  Eigen::Vector2d d_prev = (v[2] - p).normalized();  // toward previous vertex
  Eigen::Vector2d d_next = (v[1] - p).normalized();
  // half-angle of the corner
  double half = std::acos(d_prev.dot(d_next)) / 2.0;
  double setback = fillet / std::tan(half);
  Eigen::Vector2d t_prev = p + d_prev * setback;  // tangent points
  Eigen::Vector2d t_next = p + d_next * setback;
  Eigen::Vector2d bisector = (d_prev + d_next).normalized();
  Eigen::Vector2d center = p + bisector * (fillet / std::sin(half));

  Seg arc;
  arc.arc = true;
  arc.center = center;
  arc.radius = fillet;
  arc.ang0 = std::atan2(t_prev.y() - center.y(), t_prev.x() - center.x());
  arc.ang1 = std::atan2(t_next.y() - center.y(), t_next.x() - center.x());
  if (arc.ang1 < arc.ang0) arc.ang1 += 2 * kPi;
  arc.a = t_prev;
  arc.b = t_next;

  std::vector<Seg> segs;
  Seg s01;  // from fillet end to v1
  s01.a = t_next;
  s01.b = v[1];
  Seg s12;
  s12.a = v[1];
  s12.b = v[2];
  Seg s20;
  s20.a = v[2];
  s20.b = t_prev;
  // CCW order: vertices are CCW, arc runs t_prev -> t_next
  segs.push_back(arc);
  segs.push_back(s01);
  segs.push_back(s12);
  segs.push_back(s20);
  return segs;
}

std::vector<Seg> circle_outline(double radius) {
  Seg s;
  s.arc = true;
  s.center = Eigen::Vector2d::Zero();
  s.radius = radius;
  s.ang0 = 0.0;
  s.ang1 = 2 * kPi;
  s.a = {radius, 0.0};
  s.b = {radius, 0.0};
  return {s};
}

std::vector<Eigen::Vector2d> discretize(const std::vector<Seg>& segs,
                                        double max_step) {
  std::vector<Eigen::Vector2d> poly;
  for (const auto& s : segs) {
    if (!s.arc) {
      poly.push_back(s.a);
    } else {
      double arc_len = s.radius * (s.ang1 - s.ang0);
      int n = std::max(8, static_cast<int>(std::ceil(arc_len / max_step)));
      for (int i = 0; i < n; ++i) {
        double ang = s.ang0 + (s.ang1 - s.ang0) * i / n;
        poly.push_back(s.center +
                       s.radius * Eigen::Vector2d(std::cos(ang), std::sin(ang)));
      }
    }
  }
  return poly;
}

double polygon_area(const std::vector<Eigen::Vector2d>& poly) {
  double a = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return a / 2;
}

Eigen::Vector2d polygon_centroid(const std::vector<Eigen::Vector2d>& poly) {
  double a = 0;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    double cross = p.x() * q.y() - q.x() * p.y();
    a += cross;
    c += cross * (p + q);
  }
  return c / (3 * a);
}

bool point_in_polygon(const std::vector<Eigen::Vector2d>& poly,
                      const Eigen::Vector2d& pt) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if (((poly[i].y() > pt.y()) != (poly[j].y() > pt.y())) &&
        (pt.x() < (poly[j].x() - poly[i].x()) * (pt.y() - poly[i].y()) /
                          (poly[j].y() - poly[i].y()) +
                      poly[i].x()))
      inside = !inside;
  }
  return inside;
}

// Mean distance from the centroid over the footprint area, the torque
// radius of the uniform-pressure ellipsoidal limit surface.
double characteristic_radius(const std::vector<Eigen::Vector2d>& poly) {
  double area = 0, integral = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d& p = poly[i];
    const Eigen::Vector2d& q = poly[(i + 1) % poly.size()];
    // triangle fan from the origin, subdivided
    const int n = 16;
    double tri_area =
        0.5 * std::abs(p.x() * q.y() - q.x() * p.y());
    if (tri_area < 1e-15) continue;
    double cell = tri_area / (n * n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; a + b < n; ++b) {
        // two sub-triangles per cell except at the diagonal edge
        double u = (a + 1.0 / 3) / n, v = (b + 1.0 / 3) / n;
        integral += cell * (u * p + v * q).norm();
        if (a + b < n - 1) {
          double u2 = (a + 2.0 / 3) / n, v2 = (b + 2.0 / 3) / n;
          integral += cell * (u2 * p + v2 * q).norm();
        }
      }
    }
    area += tri_area;
  }
  return integral / area;
}

double yaw_of(const Eigen::Quaterniond& q) {
  Eigen::Vector3d x = q * Eigen::Vector3d::UnitX();
  return std::atan2(x.y(), x.x());
}

Eigen::Quaterniond yaw_quat(double yaw) {
  return Eigen::Quaterniond(
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
}

}  // namespace

ShapeKind shape_kind_from_name(const std::string& name) {
  if (name == "cube") return ShapeKind::Cube;
  if (name == "cuboid") return ShapeKind::Cuboid;
  if (name == "triangular-prism") return ShapeKind::TriangularPrism;
  if (name == "rounded-prism") return ShapeKind::RoundedPrism;
  if (name == "cylinder") return ShapeKind::Cylinder;
  if (name == "box") return ShapeKind::Box;
  throw Error(ErrorCode::UnknownShape, "unknown shape: " + name);
}

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Cube: return "cube";
    case ShapeKind::Cuboid: return "cuboid";
    case ShapeKind::TriangularPrism: return "triangular-prism";
    case ShapeKind::RoundedPrism: return "rounded-prism";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Box: return "box";
  }
  throw Error(ErrorCode::UnknownShape, "unknown shape kind");
}

void ShapeSpec::validate() const {
  for (double d : dims)
    if (d <= 0) throw Error(ErrorCode::UnknownShape, "non-positive dimension");
  if (mass <= 0) throw Error(ErrorCode::UnknownShape, "non-positive mass");
  if (sampling_density <= 0)
    throw Error(ErrorCode::UnknownShape, "non-positive sampling density");
  std::size_t need = 0;
  switch (kind) {
    case ShapeKind::Cube: need = 1; break;
    case ShapeKind::Cuboid:
    case ShapeKind::Box: need = 3; break;
    case ShapeKind::TriangularPrism:
    case ShapeKind::Cylinder: need = 2; break;
    case ShapeKind::RoundedPrism: need = 3; break;
  }
  if (dims.size() < need)
    throw Error(ErrorCode::UnknownShape, "missing shape dimensions");
}

void SimConfig::validate() const {
  if (friction_min <= 0 || friction_max < friction_min)
    throw Error(ErrorCode::Config, "bad friction range");
  if (timestep <= 0) throw Error(ErrorCode::Config, "bad timestep");
}

ShapeModel gen_shape(const ShapeSpec& spec) {
  spec.validate();
  std::vector<Seg> outline;
  double height = 0;
  switch (spec.kind) {
    case ShapeKind::Cube:
      outline = rectangle_outline(spec.dims[0], spec.dims[0]);
      height = spec.dims[0];
      break;
    case ShapeKind::Cuboid:
    case ShapeKind::Box:
      outline = rectangle_outline(spec.dims[0], spec.dims[1]);
      height = spec.dims[2];
      break;
    case ShapeKind::TriangularPrism:
      outline = triangle_outline(spec.dims[0]);
      height = spec.dims[1];
      break;
    case ShapeKind::RoundedPrism:
      outline = rounded_triangle_outline(spec.dims[0], spec.dims[2]);
      height = spec.dims[1];
      break;
    case ShapeKind::Cylinder:
      outline = circle_outline(spec.dims[0]);
      height = spec.dims[1];
      break;
  }

  const double spacing = 1.0 / std::sqrt(spec.sampling_density);
  auto poly = discretize(outline, std::min(spacing, 0.01));
  Eigen::Vector2d centroid = polygon_centroid(poly);
  for (auto& s : outline) {
    s.a -= centroid;
    s.b -= centroid;
    s.center -= centroid;
  }
  for (auto& p : poly) p -= centroid;

  ShapeModel model;
  model.spec = spec;
  model.footprint = poly;
  model.height = height;
  model.char_radius = characteristic_radius(poly);

  const double hz = height / 2;
  auto add_point = [&](const Eigen::Vector3d& pt, const Eigen::Vector3d& n,
                       const Eigen::Vector2d& curv) {
    model.cloud.points.push_back(pt);
    model.analytic_normal.push_back(n);
    model.analytic_curvature.push_back(curv);
  };

  // walls
  int nz = std::max(2, static_cast<int>(std::round(height / spacing)));
  for (const auto& s : outline) {
    if (!s.arc) {
      Eigen::Vector2d d = s.b - s.a;
      double len = d.norm();
      Eigen::Vector2d dir = d / len;
      Eigen::Vector2d n2(dir.y(), -dir.x());  // outward for CCW
      int nl = std::max(2, static_cast<int>(std::round(len / spacing)));
      for (int i = 0; i < nl; ++i) {
        Eigen::Vector2d p2 = s.a + dir * len * ((i + 0.5) / nl);
        for (int zi = 0; zi < nz; ++zi) {
          double z = -hz + height * ((zi + 0.5) / nz);
          add_point({p2.x(), p2.y(), z}, {n2.x(), n2.y(), 0.0},
                    {0.0, 0.0});
        }
      }
    } else {
      double arc_len = s.radius * (s.ang1 - s.ang0);
      int nl = std::max(8, static_cast<int>(std::round(arc_len / spacing)));
      for (int i = 0; i < nl; ++i) {
        double ang = s.ang0 + (s.ang1 - s.ang0) * ((i + 0.5) / nl);
        Eigen::Vector2d n2(std::cos(ang), std::sin(ang));
        Eigen::Vector2d p2 = s.center + s.radius * n2;
        for (int zi = 0; zi < nz; ++zi) {
          double z = -hz + height * ((zi + 0.5) / nz);
          add_point({p2.x(), p2.y(), z}, {n2.x(), n2.y(), 0.0},
                    {1.0 / s.radius, 0.0});
        }
      }
    }
  }

  // top face
  Eigen::Vector2d lo(1e9, 1e9), hi(-1e9, -1e9);
  for (const auto& p : poly) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (double x = lo.x() + spacing / 2; x < hi.x(); x += spacing) {
    for (double y = lo.y() + spacing / 2; y < hi.y(); y += spacing) {
      if (point_in_polygon(poly, {x, y}))
        add_point({x, y, hz}, Eigen::Vector3d::UnitZ(), {0.0, 0.0});
    }
  }

  return model;
}

double sample_friction(const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  return std::uniform_real_distribution<double>(cfg.friction_min,
                                                cfg.friction_max)(rng);
}

SimResult simulate_push(const ShapeModel& shape, const Pose& object_pose,
                        const Pose& base_pose, const Pose& link_offset,
                        const LinkGeometry& link, const Action& action,
                        double mu, const SimConfig& cfg) {
  cfg.validate();
  if (action.duration <= 0)
    throw Error(ErrorCode::Config, "non-positive push duration");
  const double c = cfg.pressure_radius > 0 ? cfg.pressure_radius
                                           : shape.char_radius;
  const double c2 = c * c;
  const double dt = cfg.timestep;
  const int steps = std::max(1, static_cast<int>(std::round(action.duration / dt)));
  const double omega_base = action.angular_deg * kPi / 180.0;
  const double half_w = link.width / 2;
  const double contact_band = 1e-3;

  // planar state
  Eigen::Vector2d obj_p(object_pose.p.x(), object_pose.p.y());
  double obj_yaw = yaw_of(object_pose.q);
  const double obj_z = cfg.ground_height + shape.height / 2;
  Eigen::Vector2d base_p(base_pose.p.x(), base_pose.p.y());
  double base_yaw = yaw_of(base_pose.q);
  const double base_z = base_pose.p.z();

  auto link_world = [&]() {
    Pose base(Eigen::Vector3d(base_p.x(), base_p.y(), base_z),
              yaw_quat(base_yaw));
    return compose(base, link_offset);
  };
  auto object_world = [&]() {
    return Pose(Eigen::Vector3d(obj_p.x(), obj_p.y(), obj_z),
                yaw_quat(obj_yaw));
  };

  SimResult result;
  const int n_waypoints = 12;
  std::vector<int> record_steps;
  for (int i = 0; i < n_waypoints; ++i)
    record_steps.push_back(static_cast<int>(
        std::round(static_cast<double>(i) * steps / (n_waypoints - 1))));

  int last_contact_step = -1;
  auto record = [&](int step) {
    result.times.push_back(step * dt);
    result.object_traj.push_back(object_world());
    result.link_traj.push_back(link_world());
  };
  record(0);

  for (int step = 0; step < steps; ++step) {
    // link leads
    Eigen::Rotation2Dd rb(base_yaw);
    base_p += rb * Eigen::Vector2d(action.linear.x(), action.linear.y()) * dt;
    base_yaw += omega_base * dt;

    Pose lw = link_world();
    Eigen::Vector2d face(lw.p.x(), lw.p.y());
    Eigen::Vector3d nx3 = lw.q * Eigen::Vector3d::UnitX();
    Eigen::Vector3d ty3 = lw.q * Eigen::Vector3d::UnitY();
    Eigen::Vector2d nhat(nx3.x(), nx3.y());
    nhat.normalize();
    Eigen::Vector2d that(ty3.x(), ty3.y());
    that.normalize();

    // world-frame footprint
    Eigen::Rotation2Dd ro(obj_yaw);
    std::vector<Eigen::Vector2d> contacts;
    double min_gap = 1e9;
    for (const auto& v : shape.footprint) {
      Eigen::Vector2d w = obj_p + ro * v;
      double dn = (w - face).dot(nhat);
      double dtang = (w - face).dot(that);
      if (std::abs(dtang) > half_w) continue;
      min_gap = std::min(min_gap, dn);
      if (dn < contact_band) contacts.push_back(w);
    }

    if (!contacts.empty()) {
      result.made_contact = true;
      last_contact_step = step;
      Eigen::Vector2d r_c = Eigen::Vector2d::Zero();
      for (const auto& p : contacts) r_c += p;
      r_c /= static_cast<double>(contacts.size());

      // pusher velocity at the contact point
      Eigen::Vector2d v_base = rb * Eigen::Vector2d(action.linear.x(),
                                                    action.linear.y());
      Eigen::Vector2d rel = r_c - base_p;
      Eigen::Vector2d v_p =
          v_base + omega_base * Eigen::Vector2d(-rel.y(), rel.x());

      double vn = v_p.dot(nhat);
      if (vn > 1e-9) {
        Eigen::Vector2d r = r_c - obj_p;  // lever arm about the COM
        double x = r.x(), y = r.y();
        // sticking twist from limit-surface normality
        Eigen::Matrix2d M;
        M << 1 + y * y / c2, -x * y / c2, -x * y / c2, 1 + x * x / c2;
        Eigen::Vector2d v_lin = M.inverse() * v_p;
        double omega = (x * v_lin.y() - y * v_lin.x()) / c2;

        Eigen::Vector2d f_dir = v_lin.normalized();
        const double cone_cos = std::cos(std::atan(mu));
        bool stick = f_dir.dot(nhat) >= cone_cos;

        if (!stick) {
          // slipping: force on a friction-cone edge; normal contact
          // velocity matches the pusher
          double best_quality = -1e18;
          Eigen::Vector2d best_v = Eigen::Vector2d::Zero();
          double best_omega = 0;
          for (double sgn : {1.0, -1.0}) {
            Eigen::Vector2d f = (nhat + sgn * mu * that).normalized();
            double om_dir = (x * f.y() - y * f.x()) / c2;
            Eigen::Vector2d g = f + om_dir * Eigen::Vector2d(-y, x);
            double gn = g.dot(nhat);
            if (gn <= 1e-12) continue;
            double lambda = vn / gn;
            Eigen::Vector2d vl = lambda * f;
            double om = lambda * om_dir;
            Eigen::Vector2d v_c = vl + om * Eigen::Vector2d(-y, x);
            double slip = (v_p - v_c).dot(that);
            double quality = slip * (sgn * mu);  // friction drags with slip
            if (quality > best_quality) {
              best_quality = quality;
              best_v = vl;
              best_omega = om;
            }
          }
          v_lin = best_v;
          omega = best_omega;
        }

        obj_p += v_lin * dt;
        obj_yaw += omega * dt;
      }

      // non-penetration correction
      Eigen::Rotation2Dd ro2(obj_yaw);
      double max_pen = 0;
      for (const auto& v : shape.footprint) {
        Eigen::Vector2d w = obj_p + ro2 * v;
        double dn = (w - face).dot(nhat);
        double dtang = (w - face).dot(that);
        if (std::abs(dtang) > half_w) continue;
        max_pen = std::max(max_pen, -dn);
      }
      if (max_pen > 0) obj_p += nhat * std::min(max_pen, 0.005);
    }

    for (int rs : record_steps)
      if (rs == step + 1) record(step + 1);
  }

  if (!result.made_contact)
    throw Error(ErrorCode::NoContactDuringPush,
                "link never touched the object");
  result.contact_lost = last_contact_step < steps - static_cast<int>(0.05 * steps) - 1;
  return result;
}

Pose estimate_pose_from_cloud(const PointCloud& cloud) {
  if (cloud.size() < 4)
    throw Error(ErrorCode::DegenerateCloud, "need at least 4 points");
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= static_cast<double>(cloud.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points) {
    Eigen::Vector3d d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  if (es.eigenvalues()[0] < 1e-12 * std::max(1e-300, es.eigenvalues()[2]))
    throw Error(ErrorCode::DegenerateCloud, "coplanar point cloud");
  // columns ordered by descending variance, deterministic signs,
  // right-handed
  Eigen::Matrix3d rot;
  rot.col(0) = es.eigenvectors().col(2);
  rot.col(1) = es.eigenvectors().col(1);
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      if (std::abs(rot.col(c)[i]) > 1e-9) {
        if (rot.col(c)[i] < 0) rot.col(c) = -rot.col(c);
        break;
      }
    }
  }
  rot.col(2) = rot.col(0).cross(rot.col(1));
  return Pose(centroid, Eigen::Quaterniond(rot));
}

std::vector<Pose> frame_trajectory(const SimResult& result,
                                   const Pose& frame_world) {
  if (result.object_traj.empty()) return {};
  // v_t = b_t o h_v with h_v = b_0^-1 o v_0
  Pose hv = compose(inverse(result.object_traj.front()), frame_world);
  std::vector<Pose> out;
  out.reserve(result.object_traj.size());
  for (const auto& b : result.object_traj) out.push_back(compose(b, hv));
  return out;
}

void save_trajectory_csv(const SimResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << "t,obj_px,obj_py,obj_pz,obj_qw,obj_qx,obj_qy,obj_qz,"
         "link_px,link_py,link_pz,link_qw,link_qx,link_qy,link_qz\n";
  out.precision(12);
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    const Pose& o = result.object_traj[i];
    const Pose& l = result.link_traj[i];
    out << result.times[i] << "," << o.p.x() << "," << o.p.y() << ","
        << o.p.z() << "," << o.q.w() << "," << o.q.x() << "," << o.q.y()
        << "," << o.q.z() << "," << l.p.x() << "," << l.p.y() << ","
        << l.p.z() << "," << l.q.w() << "," << l.q.x() << "," << l.q.y()
        << "," << l.q.z() << "\n";
  }
}

}  // namespace pushkit
