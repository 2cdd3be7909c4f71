#include "dihs_cli/pipeline.hpp"

#include "dihs/kronecker.hpp"
#include "dihs/tables.hpp"

namespace dihs::cli {

Tables load_tables(const RunConfig& cfg) {
  Tables t;
  t.spectrum = load_spectrum_csv(cfg.spectrum_file).scaled(cfg.i0);
  const MaterialBasis all = load_materials_csv(cfg.materials_file, t.spectrum.energies);
  t.basis.names = cfg.materials;
  t.basis.attenuation.resize(all.attenuation.rows(), static_cast<Eigen::Index>(cfg.n_materials()));
  for (std::size_t m = 0; m < cfg.n_materials(); ++m) {
    const auto it = std::find(all.names.begin(), all.names.end(), cfg.materials[m]);
    if (it == all.names.end())
      throw ConfigError("config.materials: '" + cfg.materials[m] + "' is not a column of " +
                        cfg.materials_file.string());
    const auto col = static_cast<Eigen::Index>(it - all.names.begin());
    t.basis.attenuation.col(static_cast<Eigen::Index>(m)) =
        all.attenuation.col(col) * (cfg.material_scale[m] * cfg.pixel_cm);
  }
  auto [binned, basis_b] = collapse_to_bins(t.spectrum, t.basis);
  t.binned = std::move(binned);
  t.mixing = basis_b.attenuation;
  return t;
}

RadonGeometry recon_geometry(const RunConfig& cfg) {
  return RadonGeometry::parallel(cfg.image_side, cfg.n_views, cfg.n_detectors);
}

Simulation simulate(const RunConfig& cfg, const Tables& tables) {
  const RadonGeometry coarse = recon_geometry(cfg);
  const std::size_t f = cfg.supersample_factor;
  const RadonGeometry fine = RadonGeometry::parallel(cfg.image_side * f, cfg.n_views, coarse.n_detectors,
                                                     coarse.detector_spacing, 1.0 / static_cast<double>(f));
  PhantomSpec spec = cfg.phantom;
  spec.image_side = cfg.image_side * f;
  const Vector fine_truth = render_phantom(spec, cfg.n_materials());
  Simulation out;
  out.truth = bin_down(fine_truth, spec.image_side, cfg.n_materials(), f);
  const RayRadon radon(fine);
  out.counts = simulate_counts(tables.spectrum, tables.basis, radon, fine_truth,
                               cfg.poisson ? std::optional<std::uint64_t>(cfg.noise_seed) : std::nullopt);
  return out;
}

SpectralMeasurement measure(const RunConfig& cfg, const Tables& tables, std::span<const double> counts) {
  Vector c(counts.begin(), counts.end());
  for (double& v : c) v = std::max(v, cfg.zero_count_floor);
  return log_linearize(tables.binned, c);
}

namespace {

std::shared_ptr<const Denoiser> make_denoiser(const RunConfig& cfg) {
  const ImageLayout layout{cfg.image_side, cfg.n_materials()};
  const DenoiserSpec& d = cfg.denoiser;
  if (d.name == "identity") return std::make_shared<IdentityDenoiser>(layout.size());
  if (d.name == "gaussian_blur") return std::make_shared<GaussianBlurDenoiser>(layout, d.sigma);
  if (d.name == "blur_soft_threshold")
    return std::make_shared<BlurSoftThresholdDenoiser>(layout, d.sigma, d.tau, d.softness);
  return std::make_shared<BoxFilterDenoiser>(layout, d.radius);
}

}  // namespace

Setup build_setup(const RunConfig& cfg, const Tables& tables, std::span<const double> counts) {
  const RadonGeometry geom = recon_geometry(cfg);
  const std::size_t expected = geom.n_rows() * tables.binned.n_bins();
  if (counts.size() != expected)
    throw ConfigError("counts hold " + std::to_string(counts.size()) + " values; the config implies " +
                      std::to_string(expected));

  Setup s;
  std::shared_ptr<const ViewBlockedMap> radon;
  if (cfg.projector == "fourier")
    radon = std::make_shared<FourierRadon>(geom);
  else
    radon = std::make_shared<RayRadon>(geom);
  s.a = std::make_shared<KroneckerMap>(tables.mixing, radon);
  s.n = s.a->cols();
  s.problem.meas = measure(cfg, tables, counts);
  s.problem.a = s.a;
  if (cfg.regularizer == "red")
    s.problem.reg = std::make_shared<RedRegularizer>(make_denoiser(cfg), cfg.red);
  else
    s.problem.reg = std::make_shared<QuadraticSmoothness>(ImageLayout{cfg.image_side, cfg.n_materials()},
                                                          cfg.quadratic_beta);

  const std::size_t np = geom.n_views(), nd = geom.n_detectors, nb = tables.binned.n_bins();
  if (cfg.scores == "uniform") {
    s.problem.scores = [np, nd, nb](double lambda, std::uint64_t) {
      ScoreEstimate e;
      e.scores = BlockScores{Vector(np, 1.0), lambda, nd * nb};
      e.n_eff = static_cast<double>(np);
      return e;
    };
  } else if (cfg.scores == "exact") {
    const auto b = sqrt_hessian(s.problem.meas, s.a);
    if (b->rows() * b->cols() > 50'000'000)
      throw ConfigError("config.sketch.scores: exact scores need a dense B; this instance is too large");
    const Vector dense = materialize(*b);
    auto mat = std::make_shared<Eigen::MatrixXd>(
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            dense.data(), static_cast<Eigen::Index>(b->rows()), static_cast<Eigen::Index>(b->cols())));
    s.problem.scores = [mat, np, nd, nb](double lambda, std::uint64_t) {
      const Eigen::VectorXd rows = ridge_scores_exact(*mat, lambda);
      ScoreEstimate e;
      e.scores = view_block_scores(std::span<const double>(rows.data(), static_cast<std::size_t>(rows.size())), np,
                                   nd, nb, lambda);
      e.n_eff = rows.sum();
      return e;
    };
  } else {
    auto est = std::make_shared<FftScoreEstimator>(geom, tables.mixing, s.problem.meas.inv_cov_diag,
                                                   cfg.score_probes);
    s.problem.scores = [est](double lambda, std::uint64_t seed) { return est->estimate(lambda, seed); };
  }
  return s;
}

}  // namespace dihs::cli
