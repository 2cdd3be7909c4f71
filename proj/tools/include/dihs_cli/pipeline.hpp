#pragma once

#include "dihs/radon.hpp"
#include "dihs/solver.hpp"
#include "dihs/spectral_model.hpp"
#include "dihs_cli/config.hpp"

namespace dihs::cli {

/// Spectral tables for one run. Material columns are pre-multiplied by
/// material_scale and pixel_cm, so a line integral in pixel units times the
/// attenuation gives the exponent directly.
struct Tables {
  SpectrumTable spectrum;   ///< fine energy grid, for simulation
  MaterialBasis basis;      ///< N_e x N_m, scaled
  SpectrumTable binned;     ///< one effective energy per bin, diagonal S
  Eigen::MatrixXd mixing;   ///< N_b x N_m, scaled; the C of the inversion model
};

Tables load_tables(const RunConfig& cfg);

/// Reconstruction geometry: image_side pixels of unit size, unit detector pitch.
RadonGeometry recon_geometry(const RunConfig& cfg);

struct Simulation {
  Vector truth;   ///< material-major on the reconstruction grid
  Vector counts;  ///< bin-major photon counts
};

/// Renders the phantom on the refined grid, projects with the ray-driven
/// operator and draws Poisson counts; truth is the binned-down phantom.
Simulation simulate(const RunConfig& cfg, const Tables& tables);

/// Everything needed to run the solver on a count vector.
struct Setup {
  std::shared_ptr<const ViewBlockedMap> a;
  Problem problem;
  std::size_t n = 0;
};

Setup build_setup(const RunConfig& cfg, const Tables& tables, std::span<const double> counts);

/// Floors zero counts (log is undefined there) and log-linearizes.
SpectralMeasurement measure(const RunConfig& cfg, const Tables& tables, std::span<const double> counts);

}  // namespace dihs::cli
