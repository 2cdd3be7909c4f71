#include <gtest/gtest.h>

#include <sstream>

#include "dihs/kronecker.hpp"
#include "dihs/phantom.hpp"
#include "dihs/radon.hpp"
#include "dihs/spectral_model.hpp"
#include "dihs/tables.hpp"
#include "test_support.hpp"

namespace dihs {
namespace {

using testing::gaussian_vector;

SpectrumTable mono(double i0, std::size_t bins = 1) {
  SpectrumTable s;
  for (std::size_t b = 0; b < bins; ++b) {
    s.energies.push_back(30.0 + 10.0 * static_cast<double>(b));
    s.source_flux.push_back(i0);
  }
  s.detector_response = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(bins));
  return s;
}

MaterialBasis basis(Eigen::MatrixXd c) {
  MaterialBasis m;
  m.attenuation = std::move(c);
  for (Eigen::Index i = 0; i < m.attenuation.cols(); ++i) m.names.push_back("m" + std::to_string(i));
  return m;
}

SpectralMeasurement random_measurement(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(0.5, 2.0);
  SpectralMeasurement meas;
  for (std::size_t i = 0; i < m; ++i) {
    meas.log_data.push_back(normal(rng));
    meas.inv_cov_diag.push_back(uni(rng));
    meas.photon_counts.push_back(1.0);
  }
  return meas;
}

TEST(SimulateCounts, ZeroImageGivesFlux) {
  RayRadon r(RadonGeometry::parallel(8, 4));
  const Vector p = simulate_counts(mono(2000.0), basis(Eigen::MatrixXd::Constant(1, 1, 0.2)), r, Vector(64, 0.0),
                                   std::nullopt);
  for (double v : p) EXPECT_DOUBLE_EQ(v, 2000.0);
}

TEST(SimulateCounts, BeerLambertSingleMaterial) {
  RayRadon r(RadonGeometry::parallel(8, 4));
  const Vector x = testing::smooth_bumps(8, 3, 2);
  const Vector p = simulate_counts(mono(1e4), basis(Eigen::MatrixXd::Constant(1, 1, 0.3)), r, x, std::nullopt);
  const Vector rx = r.apply(x);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], 1e4 * std::exp(-0.3 * rx[i]), 1e-9 * p[i]);
}

TEST(SimulateCounts, SeededNoiseIsReproducible) {
  RayRadon r(RadonGeometry::parallel(8, 4));
  const Vector x = testing::smooth_bumps(8, 3, 2);
  const auto b = basis(Eigen::MatrixXd::Constant(1, 1, 0.3));
  const Vector a = simulate_counts(mono(500.0), b, r, x, 42), c = simulate_counts(mono(500.0), b, r, x, 42);
  const Vector d = simulate_counts(mono(500.0), b, r, x, 43);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, d);
  for (double v : a) EXPECT_EQ(v, std::round(v));
}

TEST(SimulateCounts, EmptyBinIsAModelError) {
  RayRadon r(RadonGeometry::parallel(8, 4));
  SpectrumTable s = mono(100.0, 2);
  s.source_flux[1] = 0.0;
  EXPECT_THROW(simulate_counts(s, basis(Eigen::MatrixXd::Constant(2, 1, 0.3)), r, Vector(64, 0.0), std::nullopt),
               ModelError);
}

TEST(LogLinearize, IdentitySpectrumGivesCountWeights) {
  const Vector p = {3.0, 7.5, 0.25};
  const SpectralMeasurement m = log_linearize(mono(1.0), p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_DOUBLE_EQ(m.log_data[i], -std::log(p[i]));
    EXPECT_NEAR(m.inv_cov_diag[i], p[i], 1e-12 * p[i]);
  }
}

TEST(LogLinearize, ScalarSpectrumWeightsAreCounts) {
  const Vector p = {1500.0, 20.0, 1.0};
  const SpectralMeasurement m = log_linearize(mono(2000.0), p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(m.inv_cov_diag[i], p[i], 1e-12 * p[i]);
    EXPECT_NEAR(m.log_data[i], -std::log(p[i] / 2000.0), 1e-14);
  }
}

TEST(LogLinearize, ZeroCountNamesIndex) {
  const Vector p = {5.0, 0.0, 2.0};
  try {
    log_linearize(mono(1.0), p);
    FAIL() << "expected ModelError";
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(log_linearize(mono(1.0), Vector{-1.0}), ModelError);
}

TEST(LogLinearize, RejectsRectangularSpectrum) {
  SpectrumTable s = mono(1.0, 2);
  s.detector_response = Eigen::MatrixXd::Ones(1, 2);
  EXPECT_THROW(log_linearize(s, Vector{1.0}), ContractError);
}

TEST(Loss, ZeroAtExactFitAndUnitResidual) {
  auto a = std::make_shared<DenseMap>(2, 2, Vector{1, 0, 0, 1});
  SpectralMeasurement m;
  m.log_data = {1.0, 2.0};
  m.inv_cov_diag = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(loss_eval(m, *a, Vector{1.0, 2.0}), 0.0);
  EXPECT_DOUBLE_EQ(loss_eval(m, *a, Vector{2.0, 2.0}), 0.5);
  const Vector g = loss_gradient(m, *a, Vector{1.0, 2.0});
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
}

TEST(Loss, MatchesDenseQuadraticForm) {
  DenseMap a(12, 5, gaussian_vector(60, 1));
  const SpectralMeasurement m = random_measurement(12, 2);
  const Vector x = gaussian_vector(5, 3);
  const Eigen::MatrixXd am = testing::to_eigen(a);
  const Eigen::VectorXd r = am * Eigen::Map<const Eigen::VectorXd>(x.data(), 5) -
                            Eigen::Map<const Eigen::VectorXd>(m.log_data.data(), 12);
  const double ref = 0.5 * r.dot(Eigen::Map<const Eigen::VectorXd>(m.inv_cov_diag.data(), 12).asDiagonal() * r);
  EXPECT_NEAR(loss_eval(m, a, x), ref, 1e-12 * ref);
}

class GradientFd : public ::testing::Test {
 protected:
  void SetUp() override {
    Eigen::MatrixXd c(3, 2);
    c << 0.9, 0.3, 0.6, 0.5, 0.4, 0.8;
    a = std::make_shared<KroneckerMap>(c, std::make_shared<RayRadon>(RadonGeometry::parallel(16, 10)));
    meas = random_measurement(a->rows(), 4);
  }
  std::shared_ptr<KroneckerMap> a;
  SpectralMeasurement meas;
};

TEST_F(GradientFd, MatchesCentralDifferences) {
  const Vector x = gaussian_vector(a->cols(), 5);
  const Vector g = loss_gradient(meas, *a, x);
  std::mt19937_64 rng(6);
  for (int k = 0; k < 12; ++k) {
    const Vector v = testing::gaussian_vector(a->cols(), rng);
    const double h = 1e-4;
    Vector xp = x, xm = x;
    axpy(h, v, xp);
    axpy(-h, v, xm);
    const double fd = (loss_eval(meas, *a, xp) - loss_eval(meas, *a, xm)) / (2 * h);
    EXPECT_NEAR(dot(g, v), fd, 1e-6 * std::abs(fd)) << "direction " << k;
  }
}

TEST_F(GradientFd, ConvexAlongLines) {
  const Vector x = gaussian_vector(a->cols(), 7);
  for (int k = 0; k < 5; ++k) {
    const Vector v = gaussian_vector(a->cols(), 8 + k);
    Vector xp = x, xm = x;
    axpy(0.1, v, xp);
    axpy(-0.1, v, xm);
    EXPECT_GE(loss_eval(meas, *a, xp) + loss_eval(meas, *a, xm) - 2 * loss_eval(meas, *a, x), -1e-9);
  }
}

TEST(SqrtHessian, MatchesDenseNormalMatrix) {
  Eigen::MatrixXd c(2, 2);
  c << 1.0, 0.4, 0.3, 0.8;
  auto a = std::make_shared<KroneckerMap>(c, std::make_shared<RayRadon>(RadonGeometry::parallel(8, 6)));
  const SpectralMeasurement m = random_measurement(a->rows(), 9);
  auto b = sqrt_hessian(m, a);
  const Eigen::MatrixXd am = testing::to_eigen(*a);
  const Eigen::MatrixXd h = am.transpose() * Eigen::Map<const Eigen::VectorXd>(m.inv_cov_diag.data(), static_cast<Eigen::Index>(m.inv_cov_diag.size())).asDiagonal() * am;
  const Vector v = gaussian_vector(a->cols(), 10);
  const Vector btbv = b->adjoint(b->apply(v));
  const Eigen::VectorXd ref = h * Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    EXPECT_NEAR(btbv[i], ref(static_cast<Eigen::Index>(i)), 1e-10 * ref.norm());
  EXPECT_GE(dot(v, btbv), 0.0);
}

TEST(SpectralPipeline, NoiselessLogDataMatchesLinearModel) {
  // High flux: log-linearized noiseless data reproduce (C (x) R) x.
  const auto spectrum = load_spectrum_csv(DIHS_DATA_DIR "/spectrum_mono_3bin.csv").scaled(1e5);
  const auto materials = load_materials_csv(DIHS_DATA_DIR "/materials_water_iodine_gadolinium.csv", spectrum.energies);
  const auto [inv_spec, inv_basis] = collapse_to_bins(spectrum, materials);
  MaterialBasis scaled = materials;
  scaled.attenuation *= 0.05;
  const auto geom = RadonGeometry::parallel(32, 20);
  auto radon = std::make_shared<RayRadon>(geom);
  PhantomSpec ph = desk_phantom(32, 0.01);
  const Vector x = render_phantom(ph, 3);
  const Vector p = simulate_counts(spectrum, scaled, *radon, x, std::nullopt);
  const SpectralMeasurement meas = log_linearize(inv_spec, p);
  KroneckerMap a(inv_basis.attenuation * 0.05, radon);
  EXPECT_LE(testing::rel_l2(meas.log_data, a.apply(x)), 1e-3);
  EXPECT_GE(*std::min_element(p.begin(), p.end()), 1e4);
}

TEST(Tables, SpectrumParsesAndCollapses) {
  std::istringstream in("energy_keV,flux,bin_1,bin_2\n20,2,1,0\n21,1,1,0\n30,4,0,1\n");
  const SpectrumTable s = read_spectrum_csv(in, "mem");
  EXPECT_EQ(s.n_bins(), 2u);
  EXPECT_EQ(s.n_energies(), 3u);
  MaterialBasis b;
  b.attenuation.resize(3, 1);
  b.attenuation << 3.0, 6.0, 1.0;
  b.names = {"w"};
  const auto [cs, cb] = collapse_to_bins(s, b);
  EXPECT_TRUE(cs.is_invertible_diagonal());
  EXPECT_DOUBLE_EQ(cs.source_flux[0], 3.0);
  EXPECT_DOUBLE_EQ(cb.attenuation(0, 0), (2 * 3.0 + 1 * 6.0) / 3.0);
  EXPECT_DOUBLE_EQ(cb.attenuation(1, 0), 1.0);
}

TEST(Tables, MalformedRowReportsLine) {
  std::istringstream in("energy_keV,flux,bin_1\n20,2,1\n21,abc,1\n");
  try {
    read_spectrum_csv(in, "spec.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("spec.csv:3"), std::string::npos) << e.what();
  }
}

TEST(Tables, ShippedTablesLoad) {
  const auto s = load_spectrum_csv(DIHS_DATA_DIR "/spectrum_80kvp_3bin.csv");
  EXPECT_EQ(s.n_bins(), 3u);
  const auto m = load_materials_csv(DIHS_DATA_DIR "/materials_water_iodine_gadolinium.csv", s.energies);
  EXPECT_EQ(m.n_materials(), 3u);
  EXPECT_EQ(static_cast<std::size_t>(m.attenuation.rows()), s.n_energies());
}

}  // namespace
}  // namespace dihs
