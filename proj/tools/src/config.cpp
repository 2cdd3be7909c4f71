#include "dihs_cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dihs::cli {

namespace {

// Typed access to one JSON object that remembers which keys were read, so
// unknown (misspelt) keys can be reported.
class Block {
 public:
  Block(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      fail("key '" + key + "' has the wrong type");
    }
  }

  template <class T>
  T need(const std::string& key) {
    if (!j_.contains(key)) fail("missing required key '" + key + "'");
    return get<T>(key, T{});
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Block child(const std::string& key) {
    seen_.insert(key);
    static const Json empty = Json::object();
    return Block(j_.contains(key) ? j_.at(key) : empty, where_ + "." + key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail("unknown key '" + k + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }
  const std::string& where() const { return where_; }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return std::filesystem::weakly_canonical(path);
}

PhantomSpec parse_phantom(Block b, std::size_t side) {
  const std::string preset = b.get<std::string>("preset", "desk");
  PhantomSpec spec;
  if (preset == "desk") {
    spec = desk_phantom(side, b.get<double>("insert_scale", 1.0));
  } else if (preset == "none") {
    spec.image_side = side;
  } else {
    b.fail("unknown preset '" + preset + "' (expected desk or none)");
  }
  if (b.has("circles")) {
    const Json& list = b.raw("circles");
    if (!list.is_array()) b.fail("'circles' must be an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
      Block c(list[k], b.where() + ".circles[" + std::to_string(k) + "]");
      Circle circ;
      circ.center_x = c.need<double>("center_x");
      circ.center_y = c.need<double>("center_y");
      circ.radius = c.need<double>("radius");
      circ.material = c.need<std::size_t>("material");
      circ.concentration = c.need<double>("concentration");
      c.finish();
      spec.circles.push_back(circ);
    }
  }
  b.finish();
  return spec;
}

Json phantom_to_json(const PhantomSpec& p) {
  Json circles = Json::array();
  for (const Circle& c : p.circles)
    circles.push_back({{"center_x", c.center_x},
                       {"center_y", c.center_y},
                       {"radius", c.radius},
                       {"material", c.material},
                       {"concentration", c.concentration}});
  return {{"preset", "none"}, {"circles", circles}};
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

void apply_overrides(Json& doc, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "': expected key.path=value");
    const std::string key = o.substr(0, eq), text = o.substr(eq + 1);
    Json value;
    try {
      value = Json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      value = text;
    }
    Json* node = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i].empty()) throw ConfigError("override '" + o + "': empty key component");
      if (!node->is_object()) throw ConfigError("override '" + o + "': '" + parts[i - 1] + "' is not an object");
      if (i + 1 == parts.size())
        (*node)[parts[i]] = value;
      else
        node = &(*node)[parts[i]];
    }
  }
}

RunConfig parse_config(const Json& input, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  const Json* docp = &input;
  if (input.is_object() && input.contains("config") && input.contains("artifacts")) {
    // meta.json written by simulate
    docp = &input.at("config");
    const Json& art = input.at("artifacts");
    if (art.contains("counts")) cfg.counts_file = art.at("counts").get<std::string>();
    if (art.contains("truth")) cfg.truth_file = art.at("truth").get<std::string>();
  }
  Block root(*docp, "config");

  Block g = root.child("geometry");
  cfg.image_side = g.get<std::size_t>("image_side", cfg.image_side);
  cfg.n_views = g.get<std::size_t>("n_views", cfg.n_views);
  cfg.n_detectors = g.get<std::size_t>("n_detectors", cfg.n_detectors);
  cfg.pixel_cm = g.get<double>("pixel_cm", cfg.pixel_cm);
  g.finish();
  if (cfg.image_side < 2) g.fail("image_side must be >= 2");
  if (cfg.n_views < 1) g.fail("n_views must be >= 1");
  if (!(cfg.pixel_cm > 0.0)) g.fail("pixel_cm must be positive");

  cfg.spectrum_file = resolve(base_dir, root.need<std::string>("spectrum_file"));
  cfg.materials_file = resolve(base_dir, root.need<std::string>("materials_file"));
  for (const auto* f : {&cfg.spectrum_file, &cfg.materials_file})
    if (!std::filesystem::is_regular_file(*f)) throw ConfigError("config: file not found: " + f->string());

  cfg.materials = root.get<std::vector<std::string>>("materials", {"water", "iodine", "gadolinium"});
  if (cfg.materials.empty()) root.fail("'materials' must not be empty");
  cfg.material_scale = root.get<Vector>("material_scale", Vector(cfg.materials.size(), 1.0));
  if (cfg.material_scale.size() != cfg.materials.size())
    root.fail("'material_scale' needs one entry per material");
  for (double s : cfg.material_scale)
    if (!(s > 0.0)) root.fail("'material_scale' entries must be positive");

  {
    Block sim = root.child("simulation");
    cfg.supersample_factor = sim.get<std::size_t>("supersample_factor", cfg.supersample_factor);
    sim.finish();
    if (cfg.supersample_factor < 1) sim.fail("supersample_factor must be >= 1");
  }
  cfg.phantom = parse_phantom(root.child("phantom"), cfg.image_side);
  try {
    cfg.phantom.validate(cfg.materials.size());
  } catch (const ContractError& e) {
    throw ConfigError(std::string("config.phantom: ") + e.what());
  }

  {
    Block n = root.child("noise");
    cfg.i0 = n.get<double>("I0", cfg.i0);
    cfg.poisson = n.get<bool>("poisson", cfg.poisson);
    cfg.noise_seed = n.get<std::uint64_t>("seed", cfg.noise_seed);
    cfg.zero_count_floor = n.get<double>("zero_count_floor", cfg.zero_count_floor);
    n.finish();
    if (!(cfg.i0 > 0.0)) n.fail("I0 must be positive");
    if (!(cfg.zero_count_floor > 0.0)) n.fail("zero_count_floor must be positive");
  }

  {
    Block r = root.child("regularizer");
    cfg.regularizer = r.get<std::string>("type", cfg.regularizer);
    if (cfg.regularizer != "red" && cfg.regularizer != "quadratic")
      r.fail("type must be red or quadratic");
    cfg.quadratic_beta = r.get<double>("beta", cfg.quadratic_beta);
    cfg.red.nu = r.get<double>("nu", cfg.red.nu);
    cfg.red.fd_epsilon_scale = r.get<double>("fd_epsilon_scale", cfg.red.fd_epsilon_scale);
    cfg.red.mc_probes = r.get<int>("mc_probes", cfg.red.mc_probes);
    Block d = r.child("denoiser");
    cfg.denoiser.name = d.get<std::string>("name", cfg.denoiser.name);
    cfg.denoiser.sigma = d.get<double>("sigma", cfg.denoiser.sigma);
    cfg.denoiser.tau = d.get<double>("tau", cfg.denoiser.tau);
    cfg.denoiser.softness = d.get<double>("softness", cfg.denoiser.softness);
    cfg.denoiser.radius = d.get<std::size_t>("radius", cfg.denoiser.radius);
    d.finish();
    r.finish();
    static const std::set<std::string> known{"identity", "gaussian_blur", "blur_soft_threshold", "box"};
    if (!known.count(cfg.denoiser.name)) d.fail("unknown denoiser '" + cfg.denoiser.name + "'");
    if (cfg.quadratic_beta < 0.0) r.fail("beta must be >= 0");
    try {
      cfg.red.validate();
    } catch (const ContractError& e) {
      r.fail(e.what());
    }
  }

  {
    Block s = root.child("sketch");
    cfg.solver.subsample_fraction = s.get<double>("subsample_fraction", cfg.solver.subsample_fraction);
    cfg.solver.s_blocks = s.get<std::size_t>("s_blocks", cfg.solver.s_blocks);
    cfg.solver.sketch_size_from_bound = s.get<bool>("auto_from_bound", cfg.solver.sketch_size_from_bound);
    cfg.solver.epsilon_embed = s.get<double>("epsilon", cfg.solver.epsilon_embed);
    cfg.solver.delta_embed = s.get<double>("delta", cfg.solver.delta_embed);
    cfg.score_probes = s.get<int>("probes", cfg.score_probes);
    cfg.scores = s.get<std::string>("scores", cfg.scores);
    s.finish();
    if (cfg.scores != "fft" && cfg.scores != "exact" && cfg.scores != "uniform")
      s.fail("scores must be fft, exact or uniform");
    if (cfg.score_probes < 1) s.fail("probes must be >= 1");
  }

  {
    Block s = root.child("solver");
    SolverConfig& sc = cfg.solver;
    sc.max_outer = s.get<int>("max_outer", sc.max_outer);
    sc.cg_max_iters = s.get<int>("cg_max_iters", sc.cg_max_iters);
    sc.cg_rel_tol = s.get<double>("cg_rel_tol", sc.cg_rel_tol);
    sc.step_size = s.get<double>("step_size", sc.step_size);
    sc.full_hessian_mode = s.get<bool>("full_hessian_mode", sc.full_hessian_mode);
    sc.project_nonnegative = s.get<bool>("project_nonnegative", sc.project_nonnegative);
    sc.max_backtracks = s.get<int>("max_backtracks", sc.max_backtracks);
    sc.plateau_rel_tol = s.get<double>("plateau_rel_tol", sc.plateau_rel_tol);
    sc.plateau_window = s.get<int>("plateau_window", sc.plateau_window);
    sc.seed = s.get<std::uint64_t>("seed", sc.seed);
    cfg.projector = s.get<std::string>("projector", cfg.projector);
    s.finish();
    if (cfg.projector != "ray" && cfg.projector != "fourier") s.fail("projector must be ray or fourier");
    try {
      sc.validate();
    } catch (const ContractError& e) {
      s.fail(e.what());
    }
  }

  cfg.threads = root.get<int>("threads", cfg.threads);
  if (cfg.threads < 1) root.fail("threads must be >= 1");
  cfg.output_dir = std::filesystem::absolute(base_dir / root.need<std::string>("output_dir")).lexically_normal();
  root.finish();

  // resolved document
  const SolverConfig& sc = cfg.solver;
  cfg.resolved = {
      {"geometry",
       {{"image_side", cfg.image_side},
        {"n_views", cfg.n_views},
        {"n_detectors", cfg.n_detectors},
        {"pixel_cm", cfg.pixel_cm}}},
      {"spectrum_file", cfg.spectrum_file.string()},
      {"materials_file", cfg.materials_file.string()},
      {"materials", cfg.materials},
      {"material_scale", cfg.material_scale},
      {"simulation", {{"supersample_factor", cfg.supersample_factor}}},
      {"phantom", phantom_to_json(cfg.phantom)},
      {"noise",
       {{"I0", cfg.i0}, {"poisson", cfg.poisson}, {"seed", cfg.noise_seed}, {"zero_count_floor", cfg.zero_count_floor}}},
      {"regularizer",
       {{"type", cfg.regularizer},
        {"beta", cfg.quadratic_beta},
        {"nu", cfg.red.nu},
        {"fd_epsilon_scale", cfg.red.fd_epsilon_scale},
        {"mc_probes", cfg.red.mc_probes},
        {"denoiser",
         {{"name", cfg.denoiser.name},
          {"sigma", cfg.denoiser.sigma},
          {"tau", cfg.denoiser.tau},
          {"softness", cfg.denoiser.softness},
          {"radius", cfg.denoiser.radius}}}}},
      {"sketch",
       {{"subsample_fraction", sc.subsample_fraction},
        {"s_blocks", sc.s_blocks},
        {"auto_from_bound", sc.sketch_size_from_bound},
        {"epsilon", sc.epsilon_embed},
        {"delta", sc.delta_embed},
        {"probes", cfg.score_probes},
        {"scores", cfg.scores}}},
      {"solver",
       {{"max_outer", sc.max_outer},
        {"cg_max_iters", sc.cg_max_iters},
        {"cg_rel_tol", sc.cg_rel_tol},
        {"step_size", sc.step_size},
        {"full_hessian_mode", sc.full_hessian_mode},
        {"project_nonnegative", sc.project_nonnegative},
        {"max_backtracks", sc.max_backtracks},
        {"plateau_rel_tol", sc.plateau_rel_tol},
        {"plateau_window", sc.plateau_window},
        {"seed", sc.seed},
        {"projector", cfg.projector}}},
      {"threads", cfg.threads},
      {"output_dir", cfg.output_dir.string()},
  };
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      ": JSON syntax error: " + e.what());
  }
  Json* target = &doc;
  if (doc.is_object() && doc.contains("config") && doc.contains("artifacts")) target = &doc["config"];
  apply_overrides(*target, overrides);
  const auto base = std::filesystem::absolute(path).parent_path();
  // a meta.json carries absolute paths; resolve against its own directory anyway
  return parse_config(doc, base);
}

}  // namespace dihs::cli
