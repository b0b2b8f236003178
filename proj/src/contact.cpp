#include "pushkit/contact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pushkit/error.hpp"

namespace pushkit {

const char* contact_kind_name(ContactKind kind) {
  return kind == ContactKind::RobotObject ? "robot-object"
                                          : "object-environment";
}

ContactKind contact_kind_from_name(const std::string& name) {
  if (name == "robot-object") return ContactKind::RobotObject;
  if (name == "object-environment") return ContactKind::ObjectEnvironment;
  throw Error(ErrorCode::Io, "unknown contact kind: " + name);
}

ContactModel learn_robot_object(const std::vector<SurfaceFeature>& features,
                                const Pose& link_pose,
                                const PointCloud& link_surface, double cutoff,
                                const Bandwidths& bw) {
  if (features.empty())
    throw Error(ErrorCode::EmptyFeatures, "no surface features");
  if (link_surface.points.empty())
    throw Error(ErrorCode::NoContact, "empty link surface");
  bw.validate();

  ContactModel model;
  model.kind = ContactKind::RobotObject;
  model.cutoff = cutoff;
  model.density.kind = DensityKind::Feature;
  model.density.bandwidths = bw;

  const double half = cutoff / 2;
  double total = 0;
  for (const auto& f : features) {
    double d2 = 1e18;
    for (const auto& lp : link_surface.points)
      d2 = std::min(d2, (f.v.p - lp).squaredNorm());
    double d = std::sqrt(d2);
    if (d >= cutoff) continue;
    Particle p;
    p.pose = relative_pose(f.v, link_pose);  // u_j = v_j^-1 o s
    p.descriptor = f.r;
    p.weight = std::exp(-d2 / (2 * half * half));
    total += p.weight;
    model.density.particles.push_back(p);
  }
  if (model.density.particles.empty() || total <= 0)
    throw Error(ErrorCode::NoContact, "no feature within cutoff of the link");
  for (auto& p : model.density.particles) p.weight /= total;
  return model;
}

ContactModel learn_object_environment(
    const std::vector<SurfaceFeature>& features, double ground_height,
    double delta_e, int n_samples, const Bandwidths& bw, Rng& rng) {
  if (features.empty())
    throw Error(ErrorCode::EmptyFeatures, "no surface features");
  bw.validate();

  // sample without replacement when the pool is smaller than requested
  std::vector<int> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<int> chosen;
  if (n_samples >= static_cast<int>(features.size())) {
    chosen = idx;
  } else {
    std::shuffle(idx.begin(), idx.end(), rng);
    chosen.assign(idx.begin(), idx.begin() + n_samples);
  }

  ContactModel model;
  model.kind = ContactKind::ObjectEnvironment;
  model.cutoff = delta_e;
  model.density.kind = DensityKind::Feature;
  model.density.bandwidths = bw;

  for (int i : chosen) {
    const auto& f = features[i];
    Pose z(Eigen::Vector3d(f.v.p.x(), f.v.p.y(), ground_height),
           Eigen::Quaterniond::Identity());
    if ((f.v.p - z.p).norm() >= delta_e) continue;  // binary weight 0
    Particle p;
    p.pose = relative_pose(f.v, z);
    p.descriptor = f.r;
    p.weight = 1.0;
    model.density.particles.push_back(p);
  }
  if (model.density.particles.empty())
    throw Error(ErrorCode::NoContact,
                "no sampled feature within delta_E of the ground");
  double w = 1.0 / static_cast<double>(model.density.particles.size());
  for (auto& p : model.density.particles) p.weight = w;
  return model;
}

std::string contact_model_to_json(const ContactModel& model) {
  nlohmann::json j;
  j["format"] = "pushkit-contact-model";
  j["version"] = 1;
  j["kind"] = contact_kind_name(model.kind);
  j["cutoff"] = model.cutoff;
  j["density"] = nlohmann::json::parse(density_to_json(model.density));
  return j.dump();
}

ContactModel contact_model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("bad contact model: ") + e.what());
  }
  if (j.value("format", "") != "pushkit-contact-model")
    throw Error(ErrorCode::Io, "not a contact model document");
  ContactModel model;
  model.kind = contact_kind_from_name(j.at("kind").get<std::string>());
  model.cutoff = j.at("cutoff");
  model.density = density_from_json(j.at("density").dump());
  return model;
}

}  // namespace pushkit
