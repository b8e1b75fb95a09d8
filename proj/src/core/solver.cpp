#include "pbdsim/core/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pbdsim::core {

namespace {

struct KernelTable {
  decltype(&kernels::serial::predict) predict;
  decltype(&kernels::serial::project_clusters) project_clusters;
  decltype(&kernels::serial::project_links) project_links;
  decltype(&kernels::serial::project_contacts) project_contacts;
  decltype(&kernels::serial::link_residuals) link_residuals;
  decltype(&kernels::serial::finalize) finalize;
  decltype(&kernels::serial::first_non_finite) first_non_finite;
};

constexpr KernelTable kSerial{kernels::serial::predict,        kernels::serial::project_clusters,
                              kernels::serial::project_links,  kernels::serial::project_contacts,
                              kernels::serial::link_residuals, kernels::serial::finalize,
                              kernels::serial::first_non_finite};
constexpr KernelTable kOmp{kernels::omp::predict,        kernels::omp::project_clusters,
                           kernels::omp::project_links,  kernels::omp::project_contacts,
                           kernels::omp::link_residuals, kernels::omp::finalize,
                           kernels::omp::first_non_finite};

// Counting sort of `owner[k]` into CSR form; entries stay in ascending k.
void build_incidence(const std::vector<Index>& owner, std::size_t particles, std::vector<std::size_t>& offsets,
                     std::vector<std::uint32_t>& entries) {
  offsets.assign(particles + 1, 0);
  for (Index p : owner) ++offsets[p + 1];
  for (std::size_t i = 0; i < particles; ++i) offsets[i + 1] += offsets[i];
  entries.assign(owner.size(), 0);
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t k = 0; k < owner.size(); ++k) entries[cursor[owner[k]]++] = static_cast<std::uint32_t>(k);
}

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Solver::Solver(ConstraintSet constraints, std::size_t particle_count)
    : constraints_(std::move(constraints)), particle_count_(particle_count) {
  clusters_.offsets.push_back(0);
  for (std::size_t c = 0; c < constraints_.clusters.size(); ++c) {
    const auto& cl = constraints_.clusters[c];
    cl.validate(particle_count_);
    for (std::size_t s = 0; s < cl.member_indices.size(); ++s) {
      clusters_.members.push_back(cl.member_indices[s]);
      clusters_.rest_offsets.push_back(cl.rest_positions[s] - cl.rest_centroid);
    }
    clusters_.offsets.push_back(clusters_.members.size());
  }
  build_incidence(clusters_.members, particle_count_, clusters_.particle_offsets, clusters_.particle_slots);

  std::vector<Index> ends;
  ends.reserve(2 * constraints_.links.size());
  for (const auto& l : constraints_.links) {
    if (l.i >= particle_count_ || l.j >= particle_count_ || l.i == l.j)
      throw ConfigError("distance link (" + std::to_string(l.i) + ", " + std::to_string(l.j) + ") is invalid");
    if (!(l.rest_length > 0.0)) throw ConfigError("distance link rest_length must be > 0");
    if (!(l.stiffness >= 0.0 && l.stiffness <= 1.0)) throw ConfigError("distance link stiffness outside [0,1]");
    links_.a.push_back(l.i);
    links_.b.push_back(l.j);
    links_.rest.push_back(l.rest_length);
    ends.push_back(l.i);
    ends.push_back(l.j);
  }
  build_incidence(ends, particle_count_, links_.particle_offsets, links_.particle_ends);

  if (constraints_.contact) constraints_.contact->rig.validate();
  ws_.resize(particle_count_, clusters_, links_);
}

void Solver::refresh_stiffness(int iterations) {
  if (iterations == stiffness_iterations_) return;
  clusters_.stiffness.clear();
  for (const auto& c : constraints_.clusters)
    clusters_.stiffness.push_back(apply_stiffness_iteration_correction(c.stiffness, iterations));
  links_.stiffness.clear();
  for (const auto& l : constraints_.links)
    links_.stiffness.push_back(apply_stiffness_iteration_correction(l.stiffness, iterations));
  stiffness_iterations_ = iterations;
}

void Solver::raise(std::size_t particle, const char* stage) const {
  std::size_t constraint = InstabilityError::npos;
  const std::string st(stage);
  if (st == "shape matching" && clusters_.particle_offsets[particle] < clusters_.particle_offsets[particle + 1]) {
    const std::size_t slot = clusters_.particle_slots[clusters_.particle_offsets[particle]];
    constraint = static_cast<std::size_t>(
        std::upper_bound(clusters_.offsets.begin(), clusters_.offsets.end(), slot) - clusters_.offsets.begin() - 1);
  } else if (st == "distance links" && links_.particle_offsets[particle] < links_.particle_offsets[particle + 1]) {
    constraint = links_.particle_ends[links_.particle_offsets[particle]] / 2;
  }
  std::string msg = "non-finite state at particle " + std::to_string(particle) + " during " + st;
  if (constraint != InstabilityError::npos) msg += " (constraint " + std::to_string(constraint) + ")";
  msg += "; time step too large?";
  throw InstabilityError(msg, particle, st, constraint);
}

StepReport Solver::step(ParticleSystem& system, const SimConfig& config, double time) {
  config.validate();
  if (system.count() != particle_count_)
    throw ConfigError("solver built for " + std::to_string(particle_count_) + " particles, system has " +
                      std::to_string(system.count()));
  refresh_stiffness(config.solver_iterations);
  const KernelTable& k = config.policy == ExecPolicy::parallel ? kOmp : kSerial;

  StepReport report;
  const double h = config.dt / config.substeps;
  const bool has_clusters = clusters_.cluster_count() > 0;
  const bool has_links = links_.link_count() > 0;

  ContactParams contact;
  if (constraints_.contact) {
    const auto& cc = *constraints_.contact;
    contact.fallback = catheter::fallback_perpendicular(cc.rig.direction);
    contact.margin = cc.margin;
    contact.friction = cc.friction;
    contact.catheter_shift = cc.rig.direction * (cc.rig.speed * h);
  }

  for (int sub = 0; sub < config.substeps; ++sub) {
    const bool last_sub = sub + 1 == config.substeps;
    k.predict(system.positions, system.velocities, system.predicted, system.inv_mass, config.gravity, config.damping,
              h);
    if (auto bad = k.first_non_finite(system.predicted); bad != kNoParticle) raise(bad, "prediction");
    if (constraints_.contact) contact.pose = catheter::pose_at(constraints_.contact->rig, time + h * (sub + 1));

    const bool track = config.track_residuals && last_sub && has_links;
    if (track) {
      k.link_residuals(links_, system.predicted, ws_.link_residual);
      report.link_residual_history.push_back(norm_of(ws_.link_residual));
    }

    for (int it = 0; it < config.solver_iterations; ++it) {
      if (has_clusters) {
        if (auto bad = k.project_clusters(clusters_, system.predicted, system.inv_mass, ws_); bad != kNoParticle)
          raise(bad, "shape matching");
        report.degenerate_cluster_fits += static_cast<std::size_t>(
            std::count(ws_.cluster_degenerate.begin(), ws_.cluster_degenerate.end(), 1));
      }
      if (has_links) {
        if (auto bad = k.project_links(links_, system.predicted, system.inv_mass, ws_); bad != kNoParticle)
          raise(bad, "distance links");
      }
      if (constraints_.contact) {
        const ContactCounts counts = k.project_contacts(contact, system.positions, system.predicted, system.inv_mass);
        report.axis_fallbacks += counts.axis_fallbacks;
        report.contacts = counts.contacts;
      }
      if (track) {
        k.link_residuals(links_, system.predicted, ws_.link_residual);
        report.link_residual_history.push_back(norm_of(ws_.link_residual));
      }
    }

    const Extrema ex = k.finalize(system.positions, system.velocities, system.predicted, h);
    report.max_position_delta = std::max(report.max_position_delta, ex.max_delta);
    report.max_speed = std::max(report.max_speed, ex.max_speed);
  }
  if (auto bad = k.first_non_finite(system.positions); bad != kNoParticle) raise(bad, "velocity update");

  report.cluster_residuals = ws_.cluster_residual;
  report.cluster_residual_norm = norm_of(report.cluster_residuals);
  for (std::size_t c = 0; c < ws_.cluster_degenerate.size(); ++c)
    if (ws_.cluster_degenerate[c]) report.degenerate_clusters.push_back(c);
  if (has_links) {
    k.link_residuals(links_, system.positions, ws_.link_residual);
    report.link_residuals = ws_.link_residual;
    report.link_residual_norm = norm_of(report.link_residuals);
  }
  return report;
}

StepReport step(ParticleSystem& system, const ConstraintSet& constraints, const SimConfig& config, double time) {
  Solver solver(constraints, system.count());
  return solver.step(system, config, time);
}

}  // namespace pbdsim::core
