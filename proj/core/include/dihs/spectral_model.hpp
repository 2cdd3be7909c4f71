#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "dihs/linear_map.hpp"

namespace dihs {

/// Source spectrum and detector energy response on a discrete energy grid.
/// The effective spectrum S = D (.) s scales every row of D by the flux s.
struct SpectrumTable {
  Vector energies;                    ///< keV, length N_e
  Vector source_flux;                 ///< photons per energy, length N_e
  Eigen::MatrixXd detector_response;  ///< N_b x N_e, non-negative

  std::size_t n_energies() const { return energies.size(); }
  std::size_t n_bins() const { return static_cast<std::size_t>(detector_response.rows()); }
  Eigen::MatrixXd effective() const;
  /// True when N_b == N_e and S is diagonal with a positive diagonal.
  bool is_invertible_diagonal() const;
  /// Same table with the source flux multiplied by `factor`.
  SpectrumTable scaled(double factor) const;
  void validate() const;
};

/// Mass attenuation of each basis material at each energy (C, N_e x N_m).
struct MaterialBasis {
  Eigen::MatrixXd attenuation;
  std::vector<std::string> names;

  std::size_t n_materials() const { return static_cast<std::size_t>(attenuation.cols()); }
  void validate() const;
};

/// Log-linearized spectral data and its diagonal Gaussian weights.
struct SpectralMeasurement {
  Vector photon_counts;  ///< p, bin-major, length N_d N_p N_b
  Vector log_data;       ///< y = -log(p / S_kk)
  Vector inv_cov_diag;   ///< diagonal of Sigma^{-1}
};

/// Expected counts exp(-R X C^T) S, plus Poisson noise when a seed is given.
/// `radon` maps one material image (N_v) to one sinogram; `x` is material-major.
Vector simulate_counts(const SpectrumTable& spectrum, const MaterialBasis& basis, const LinearMap& radon,
                       std::span<const double> x, std::optional<std::uint64_t> noise_seed);

/// Collapses a fine-grid spectrum to one effective energy per bin: S becomes
/// diagonal with the total bin flux, and the attenuation of each bin is the
/// spectrum-weighted mean over the bin. Used for inversion.
std::pair<SpectrumTable, MaterialBasis> collapse_to_bins(const SpectrumTable& spectrum, const MaterialBasis& basis);

/// Normalizes counts by the (diagonal) spectrum, takes -log and computes the
/// Gaussian weights Sigma^{-1}_ii = p~_i^2 S_kk^2 / p_i. Throws ModelError on
/// a non-positive count, naming its index.
SpectralMeasurement log_linearize(const SpectrumTable& spectrum, std::span<const double> counts);

/// f(x) = 1/2 ||A x - y||^2_{Sigma^{-1}}
double loss_eval(const SpectralMeasurement& meas, const LinearMap& a, std::span<const double> x);

/// grad f = A^T Sigma^{-1} (A x - y), computed exactly.
Vector loss_gradient(const SpectralMeasurement& meas, const LinearMap& a, std::span<const double> x);

/// B = Sigma^{-1/2} A, so that B^T B is the Hessian of the loss.
std::shared_ptr<const ViewBlockedMap> sqrt_hessian(const SpectralMeasurement& meas,
                                                   std::shared_ptr<const ViewBlockedMap> a);

}  // namespace dihs
