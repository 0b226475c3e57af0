// Built-in experiment configurations: convergence in time and space, long
// phase separation runs, the L-shaped Dirichlet test and 3D runs, each at
// the published resolution and, where that is expensive, at desk scale.
#ifndef MBPETD_PRESETS_HPP
#define MBPETD_PRESETS_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbpetd/config.hpp"

namespace mbpetd {

namespace detail {

inline RunConfig convergence_base(std::string name, std::string description, int cells) {
  RunConfig c;
  c.name = std::move(name);
  c.description = std::move(description);
  c.grid.lower = {-0.5, -0.5};
  c.grid.upper = {0.5, 0.5};
  c.grid.cells = {cells, cells};
  c.grid.bc = BoundaryKind::Periodic;
  c.physics.potential = PotentialKind::DoubleWell;
  c.physics.epsilon = 0.01;
  c.physics.mobility = MobilityKind::Constant;
  c.physics.mobility_value = 1.0;
  c.physics.kappa = 2.0;
  c.velocity.kind = VelocityKind::Constant;
  c.velocity.value = {1.0, 1.0};
  c.initial.kind = InitialKind::CosProduct;
  c.initial.amplitude = 1.0;
  c.initial.frequency = 2.0;
  c.time.scheme = Scheme::Etdrk2;
  c.time.final_time = 0.1;
  c.output.series = c.name + ".csv";
  return c;
}

inline RunConfig phase_separation_2d(std::string name, std::string description,
                                     PotentialKind potential) {
  RunConfig c;
  c.name = std::move(name);
  c.description = std::move(description);
  c.grid.lower = {-0.5, -0.5};
  c.grid.upper = {0.5, 0.5};
  c.grid.cells = {64, 64};
  c.grid.bc = BoundaryKind::Neumann;
  c.physics.potential = potential;
  c.physics.theta = 0.8;
  c.physics.theta_c = 1.6;
  c.physics.epsilon = 0.01;
  c.physics.mobility = MobilityKind::Degenerate;
  c.physics.kappa = 1.0;
  c.velocity.kind = VelocityKind::Decaying;
  c.initial.kind = InitialKind::SinProduct;
  c.initial.amplitude = 0.9;
  c.initial.frequency = 100.0;
  c.time.scheme = Scheme::Etdrk2;
  c.time.tau = 0.1;
  c.time.final_time = 50.0;
  c.output.series = c.name + ".csv";
  return c;
}

inline RunConfig random_3d(std::string name, std::string description, PotentialKind potential,
                           double kappa, int cells) {
  RunConfig c;
  c.name = std::move(name);
  c.description = std::move(description);
  c.grid.lower = {-0.5, -0.5, -0.5};
  c.grid.upper = {0.5, 0.5, 0.5};
  c.grid.cells = {cells, cells, cells};
  c.grid.bc = BoundaryKind::Periodic;
  c.physics.potential = potential;
  c.physics.theta = 0.8;
  c.physics.theta_c = 1.6;
  c.physics.epsilon = 0.01;
  c.physics.mobility = MobilityKind::Constant;
  c.physics.mobility_value = 1.0;
  c.physics.kappa = kappa;
  c.velocity.kind = VelocityKind::Constant;
  c.velocity.value = {1.0, 1.0, 1.0};
  c.initial.kind = InitialKind::Random;
  c.initial.amplitude = 0.9;
  c.initial.seed = 20230101;
  c.time.scheme = Scheme::Etdrk2;
  c.time.tau = 0.01;
  c.time.final_time = 8.0;
  c.output.series = c.name + ".csv";
  return c;
}

inline RunConfig temporal(std::string name, std::string description, int cells) {
  RunConfig c = convergence_base(std::move(name), std::move(description), cells);
  c.time.tau = 1.0 / 16.0;
  c.convergence.tau_list = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  c.convergence.tau_ref = 1.0 / 1024;
  return c;
}

inline RunConfig spatial(std::string name, std::string description, std::vector<int> cells_list,
                         int cells_ref, double tau_fixed) {
  RunConfig c = convergence_base(std::move(name), std::move(description), cells_ref);
  c.time.tau = tau_fixed;
  c.convergence.cells_list = std::move(cells_list);
  c.convergence.cells_ref = cells_ref;
  c.convergence.tau_fixed = tau_fixed;
  return c;
}

}  // namespace detail

inline std::vector<RunConfig> builtin_presets() {
  using namespace detail;
  std::vector<RunConfig> out;
  out.push_back(temporal("temporal_2d", "temporal convergence, periodic 2D, h = 1/1024", 1024));
  out.push_back(
      temporal("temporal_2d_desk", "temporal convergence, periodic 2D, h = 1/128", 128));
  out.push_back(spatial("spatial_2d", "spatial convergence, reference h = 1/512, tau = 1/2048",
                        {8, 16, 32, 64, 128, 256}, 512, 1.0 / 2048));
  out.push_back(spatial("spatial_2d_desk",
                        "spatial convergence, reference h = 1/256, tau = 1/1024",
                        {8, 16, 32, 64}, 256, 1.0 / 1024));
  out.push_back(phase_separation_2d(
      "mbp_dw_2d", "double well, degenerate mobility, Neumann, h = 1/64, T = 50",
      PotentialKind::DoubleWell));
  out.push_back(phase_separation_2d(
      "mbp_fh_2d", "Flory-Huggins 0.8/1.6, degenerate mobility, Neumann, h = 1/64, T = 50",
      PotentialKind::FloryHuggins));
  {
    RunConfig c;
    c.name = "lshape";
    c.description = "L-shaped domain, Dirichlet u = 1 on y = 0, rotating flow, T = 10";
    c.grid.lower = {0.0, 0.0};
    c.grid.upper = {1.0, 1.0};
    c.grid.cells = {64, 64};
    c.grid.bc = BoundaryKind::Dirichlet;
    c.grid.mask = MaskKind::LShape;
    c.grid.boundary_data = BoundaryDataKind::BottomOne;
    c.physics.potential = PotentialKind::DoubleWell;
    c.physics.epsilon = 0.01;
    c.physics.mobility = MobilityKind::Degenerate;
    c.physics.kappa = 1.0;
    c.velocity.kind = VelocityKind::Rotating;
    c.initial.kind = InitialKind::Zero;
    c.time.scheme = Scheme::Etdrk2;
    c.time.tau = 0.01;
    c.time.final_time = 10.0;
    c.output.series = c.name + ".csv";
    out.push_back(std::move(c));
  }
  out.push_back(random_3d("dw_3d", "3D double well, periodic, h = 1/128, T = 8",
                          PotentialKind::DoubleWell, 2.0, 128));
  out.push_back(random_3d("dw_3d_desk", "3D double well, periodic, h = 1/32, T = 8",
                          PotentialKind::DoubleWell, 2.0, 32));
  out.push_back(random_3d("fh_3d", "3D Flory-Huggins, periodic, h = 1/128, T = 8",
                          PotentialKind::FloryHuggins, 8.02, 128));
  out.push_back(random_3d("fh_3d_desk", "3D Flory-Huggins, periodic, h = 1/32, T = 8",
                          PotentialKind::FloryHuggins, 8.02, 32));
  return out;
}

inline RunConfig find_preset(std::string_view name) {
  for (auto& c : builtin_presets()) {
    if (c.name == name) return c;
  }
  std::string known;
  for (const auto& c : builtin_presets()) known += (known.empty() ? "" : ", ") + c.name;
  throw ConfigError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

}  // namespace mbpetd

#endif  // MBPETD_PRESETS_HPP
