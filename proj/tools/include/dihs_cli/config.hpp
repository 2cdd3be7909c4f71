#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dihs/phantom.hpp"
#include "dihs/solver.hpp"

namespace dihs::cli {

using Json = nlohmann::ordered_json;

/// Anything wrong with the run configuration (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DenoiserSpec {
  std::string name = "gaussian_blur";  ///< identity | gaussian_blur | blur_soft_threshold | box
  double sigma = 1.0;
  double tau = 0.05;
  double softness = 0.01;
  std::size_t radius = 1;
};

struct RunConfig {
  // geometry
  std::size_t image_side = 64;
  std::size_t n_views = 60;
  std::size_t n_detectors = 0;  ///< 0: cover the image diagonal
  double pixel_cm = 0.1;

  // tables
  std::filesystem::path spectrum_file;
  std::filesystem::path materials_file;
  std::vector<std::string> materials;  ///< columns of the materials file, in order
  Vector material_scale;               ///< g/cm^3 per image unit, one per material

  PhantomSpec phantom;
  std::size_t supersample_factor = 2;  ///< simulation grid refinement

  // noise
  double i0 = 2000.0;
  bool poisson = true;
  std::uint64_t noise_seed = 1;
  double zero_count_floor = 0.5;

  // regularizer
  std::string regularizer = "red";  ///< red | quadratic
  DenoiserSpec denoiser;
  RedConfig red;
  double quadratic_beta = 0.0;

  // sketch
  std::string scores = "fft";  ///< fft | exact | uniform
  int score_probes = 16;

  std::string projector = "ray";  ///< reconstruction projector: ray | fourier
  SolverConfig solver;
  int threads = 1;

  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> counts_file;  ///< from a meta.json
  std::optional<std::filesystem::path> truth_file;

  /// Fully resolved document (absolute paths, every default filled in).
  Json resolved;

  std::size_t n_materials() const { return materials.size(); }
};

/// Applies `key.path=value` overrides; value is parsed as JSON when it is
/// valid JSON and taken as a string otherwise.
void apply_overrides(Json& doc, const std::vector<std::string>& overrides);

/// Parses and validates a run config. Relative paths resolve against
/// `base_dir`. A meta.json written by `simulate` is accepted as well.
RunConfig parse_config(const Json& doc, const std::filesystem::path& base_dir);

/// Reads `path`, applies overrides and parses. Syntax errors name the line.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace dihs::cli
