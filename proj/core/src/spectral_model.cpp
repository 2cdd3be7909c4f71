#include "dihs/spectral_model.hpp"

#include <algorithm>
#include <random>

namespace dihs {

Eigen::MatrixXd SpectrumTable::effective() const {
  Eigen::MatrixXd s = detector_response;
  for (Eigen::Index e = 0; e < s.cols(); ++e) s.col(e) *= source_flux[static_cast<std::size_t>(e)];
  return s;
}

bool SpectrumTable::is_invertible_diagonal() const {
  if (n_bins() != n_energies()) return false;
  const Eigen::MatrixXd s = effective();
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j)
      if ((i == j && !(s(i, j) > 0.0)) || (i != j && s(i, j) != 0.0)) return false;
  return true;
}

SpectrumTable SpectrumTable::scaled(double factor) const {
  SpectrumTable out = *this;
  for (double& f : out.source_flux) f *= factor;
  return out;
}

void SpectrumTable::validate() const {
  require(!energies.empty(), "spectrum: no energies");
  require(source_flux.size() == energies.size(), "spectrum: flux length differs from energy grid");
  require(static_cast<std::size_t>(detector_response.cols()) == energies.size(),
          "spectrum: detector response has wrong number of energies");
  require(detector_response.rows() >= 1, "spectrum: no energy bins");
  for (double f : source_flux) require(std::isfinite(f) && f >= 0.0, "spectrum: flux must be non-negative");
  require((detector_response.array() >= 0.0).all(), "spectrum: detector response must be non-negative");
}

void MaterialBasis::validate() const {
  require(attenuation.cols() >= 1, "materials: no basis materials");
  require((attenuation.array() >= 0.0).all() && attenuation.allFinite(), "materials: attenuation must be finite, >= 0");
  for (Eigen::Index a = 0; a < attenuation.cols(); ++a)
    for (Eigen::Index b = a + 1; b < attenuation.cols(); ++b)
      require((attenuation.col(a) - attenuation.col(b)).cwiseAbs().maxCoeff() > 0.0,
              "materials: duplicated material columns");
}

Vector simulate_counts(const SpectrumTable& spectrum, const MaterialBasis& basis, const LinearMap& radon,
                       std::span<const double> x, std::optional<std::uint64_t> noise_seed) {
  spectrum.validate();
  basis.validate();
  const std::size_t nv = radon.cols(), nr = radon.rows();
  const std::size_t nm = basis.n_materials(), ne = spectrum.n_energies(), nb = spectrum.n_bins();
  require(static_cast<std::size_t>(basis.attenuation.rows()) == ne, "simulate_counts: material table / spectrum mismatch");
  require(x.size() == nv * nm, "simulate_counts: image has wrong length");
  for (double v : x) require(std::isfinite(v) && v >= 0.0, "simulate_counts: material image must be finite and >= 0");

  std::vector<Vector> line(nm);
  for (std::size_t m = 0; m < nm; ++m) line[m] = radon.apply(x.subspan(m * nv, nv));

  const Eigen::MatrixXd s = spectrum.effective();
  Vector counts(nr * nb, 0.0);
  Vector atten(nr);
  for (std::size_t e = 0; e < ne; ++e) {
    std::fill(atten.begin(), atten.end(), 0.0);
    for (std::size_t m = 0; m < nm; ++m)
      axpy(basis.attenuation(static_cast<Eigen::Index>(e), static_cast<Eigen::Index>(m)), line[m], atten);
    for (std::size_t b = 0; b < nb; ++b) {
      const double weight = s(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e));
      if (weight == 0.0) continue;
      double* out = counts.data() + b * nr;
      for (std::size_t i = 0; i < nr; ++i) out[i] += weight * std::exp(-atten[i]);
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (!(counts[i] > 0.0))
      throw ModelError("simulate_counts: expected count at measurement " + std::to_string(i) +
                       " is not positive (empty energy bin?)");

  if (noise_seed) {
    std::mt19937_64 rng(*noise_seed);
    for (double& c : counts) {
      std::poisson_distribution<long long> draw(c);
      c = static_cast<double>(draw(rng));
    }
  }
  return counts;
}

std::pair<SpectrumTable, MaterialBasis> collapse_to_bins(const SpectrumTable& spectrum, const MaterialBasis& basis) {
  spectrum.validate();
  basis.validate();
  const Eigen::MatrixXd s = spectrum.effective();
  const auto nb = static_cast<Eigen::Index>(spectrum.n_bins());
  SpectrumTable out;
  out.energies.resize(static_cast<std::size_t>(nb));
  out.source_flux.resize(static_cast<std::size_t>(nb));
  out.detector_response = Eigen::MatrixXd::Identity(nb, nb);
  MaterialBasis mb;
  mb.names = basis.names;
  mb.attenuation.resize(nb, basis.attenuation.cols());
  for (Eigen::Index b = 0; b < nb; ++b) {
    const double total = s.row(b).sum();
    if (!(total > 0.0)) throw ModelError("collapse_to_bins: bin " + std::to_string(b) + " receives no photons");
    double e_mean = 0.0;
    for (Eigen::Index e = 0; e < s.cols(); ++e) e_mean += s(b, e) * spectrum.energies[static_cast<std::size_t>(e)];
    out.energies[static_cast<std::size_t>(b)] = e_mean / total;
    out.source_flux[static_cast<std::size_t>(b)] = total;
    mb.attenuation.row(b) = (s.row(b) * basis.attenuation) / total;
  }
  return {out, mb};
}

SpectralMeasurement log_linearize(const SpectrumTable& spectrum, std::span<const double> counts) {
  spectrum.validate();
  require(spectrum.is_invertible_diagonal(),
          "log_linearize: the inversion spectrum must be diagonal and nonsingular (N_b == N_e)");
  const std::size_t nb = spectrum.n_bins();
  require(counts.size() % nb == 0, "log_linearize: count vector length is not a multiple of the bin count");
  const std::size_t per_bin = counts.size() / nb;
  const Eigen::MatrixXd s = spectrum.effective();

  SpectralMeasurement meas;
  meas.photon_counts.assign(counts.begin(), counts.end());
  meas.log_data.resize(counts.size());
  meas.inv_cov_diag.resize(counts.size());
  for (std::size_t b = 0; b < nb; ++b) {
    const double skk = s(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
    for (std::size_t i = b * per_bin; i < (b + 1) * per_bin; ++i) {
      const double p = counts[i];
      if (!(p > 0.0) || !std::isfinite(p))
        throw ModelError("log_linearize: count at index " + std::to_string(i) + " is " + std::to_string(p) +
                         "; counts must be positive");
      const double p_tilde = p / skk;
      meas.log_data[i] = -std::log(p_tilde);
      meas.inv_cov_diag[i] = p_tilde * skk * (1.0 / p) * skk * p_tilde;
    }
  }
  return meas;
}

double loss_eval(const SpectralMeasurement& meas, const LinearMap& a, std::span<const double> x) {
  require(meas.log_data.size() == a.rows() && meas.inv_cov_diag.size() == a.rows(), "loss_eval: dimension mismatch");
  const Vector ax = a.apply(x);
  double f = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    const double r = ax[i] - meas.log_data[i];
    f += meas.inv_cov_diag[i] * r * r;
  }
  return 0.5 * f;
}

Vector loss_gradient(const SpectralMeasurement& meas, const LinearMap& a, std::span<const double> x) {
  require(meas.log_data.size() == a.rows() && meas.inv_cov_diag.size() == a.rows(),
          "loss_gradient: dimension mismatch");
  Vector r = a.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = meas.inv_cov_diag[i] * (r[i] - meas.log_data[i]);
  return a.adjoint(r);
}

std::shared_ptr<const ViewBlockedMap> sqrt_hessian(const SpectralMeasurement& meas,
                                                   std::shared_ptr<const ViewBlockedMap> a) {
  require(a != nullptr && meas.inv_cov_diag.size() == a->rows(), "sqrt_hessian: dimension mismatch");
  Vector w(meas.inv_cov_diag.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    require(meas.inv_cov_diag[i] > 0.0, "sqrt_hessian: inverse covariance must be positive");
    w[i] = std::sqrt(meas.inv_cov_diag[i]);
  }
  return std::make_shared<RowScaledMap>(std::move(w), std::move(a));
}

}  // namespace dihs
