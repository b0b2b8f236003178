#pragma once

#include <string>

#include "pushkit/cloud.hpp"
#include "pushkit/density.hpp"
#include "pushkit/features.hpp"

namespace pushkit {

enum class ContactKind { RobotObject, ObjectEnvironment };

const char* contact_kind_name(ContactKind kind);
ContactKind contact_kind_from_name(const std::string& name);

/// Kernel density over (u, r): pose of the contacted body relative to a
/// local surface frame, plus the frame's curvature descriptor.
struct ContactModel {
  ContactKind kind = ContactKind::RobotObject;
  ParticleDensity density;  // particle pose = u, descriptor = r
  double cutoff = 0.01;     // meters
};

/// Particles u_j = v_j^-1 o link_pose for features within cutoff of the
/// link surface, weighted by a truncated Gaussian of the distance.
ContactModel learn_robot_object(const std::vector<SurfaceFeature>& features,
                                const Pose& link_pose,
                                const PointCloud& link_surface, double cutoff,
                                const Bandwidths& bw);

/// Binary-weighted environment contacts against a ground plane; the
/// environment frame sits at the closest ground point below each sampled
/// feature, z up.
ContactModel learn_object_environment(
    const std::vector<SurfaceFeature>& features, double ground_height,
    double delta_e, int n_samples, const Bandwidths& bw, Rng& rng);

std::string contact_model_to_json(const ContactModel& model);
ContactModel contact_model_from_json(const std::string& json);

}  // namespace pushkit
