#include "dihs_cli/report.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "dihs/raw_io.hpp"

namespace dihs::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

double parse_or_nan(const std::string& s) { return s.empty() ? kNaN : std::stod(s); }

std::vector<CurvePoint> read_curve(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("outer_iter,cost,", 0) != 0) throw IoError(path.string() + ": unexpected header");
  std::vector<CurvePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    while (f.size() < 9) f.emplace_back();
    CurvePoint p;
    p.outer_iter = std::stoi(f[0]);
    p.cost = parse_or_nan(f[1]);
    p.rmse = parse_or_nan(f[3]);
    p.row_accesses = parse_or_nan(f[5]);
    out.push_back(p);
  }
  if (out.empty()) throw IoError(path.string() + ": no iterations");
  return out;
}

std::string num(double v, int prec = 6) {
  if (std::isnan(v)) return "n/a";
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

}  // namespace

RunSummary load_run(const fs::path& dir) {
  RunSummary r;
  r.dir = dir;
  r.name = fs::absolute(dir).lexically_normal().filename().string();
  if (r.name.empty()) r.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  const Json summary = read_json(dir / "summary.json");
  const Json& cfg = summary.at("config");
  r.phantom = {{"phantom", cfg.at("phantom")}, {"geometry", cfg.at("geometry")}, {"materials", cfg.at("materials")}};
  r.status = summary.at("status").get<std::string>();
  r.mode = summary.value("mode", "");
  r.final_cost = summary.at("final_cost").get<double>();
  r.row_accesses = summary.at("row_accesses").get<double>();
  r.materials = cfg.at("materials").get<std::vector<std::string>>();
  r.rmse_overall = kNaN;
  if (!summary.at("rmse").is_null()) {
    r.rmse_overall = summary.at("rmse").at("overall").get<double>();
    for (const auto& m : r.materials) r.rmse_per_material.push_back(summary.at("rmse").at(m).get<double>());
  }
  if (fs::exists(dir / "truth.bin")) r.truth = read_raw_f32(dir / "truth.bin");
  r.curve = read_curve(dir / "iterations.csv");
  return r;
}

std::string comparison_csv(const std::vector<RunSummary>& runs) {
  std::ostringstream s;
  s << std::setprecision(10);
  s << "run,outer_iter,cost,row_accesses,rmse\n";
  for (const auto& r : runs)
    for (const auto& p : r.curve)
      s << r.name << ',' << p.outer_iter << ',' << p.cost << ',' << static_cast<std::uint64_t>(p.row_accesses) << ','
        << (std::isnan(p.rmse) ? std::string() : num(p.rmse, 10)) << '\n';
  return s.str();
}

std::string cost_vs_work_svg(const std::vector<RunSummary>& runs) {
  const double w = 640, h = 420, ml = 80, mr = 170, mt = 20, mb = 50;
  double xmax = 1.0, ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& r : runs)
    for (const auto& p : r.curve) {
      xmax = std::max(xmax, p.row_accesses);
      if (p.cost > 0.0) {
        ymin = std::min(ymin, p.cost);
        ymax = std::max(ymax, p.cost);
      }
    }
  if (!(ymax > 0.0)) ymin = ymax = 1.0;
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::max(ly0 + 1.0, std::ceil(std::log10(ymax)));
  auto px = [&](double x) { return ml + (w - ml - mr) * x / xmax; };
  auto py = [&](double y) { return mt + (h - mt - mb) * (ly1 - std::log10(std::max(y, ymin))) / (ly1 - ly0); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

  std::ostringstream s;
  s << std::fixed << std::setprecision(1);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double e = ly0; e <= ly1; e += 1.0) {
    s << "<line x1=\"" << ml - 4 << "\" x2=\"" << ml << "\" y1=\"" << py(std::pow(10.0, e)) << "\" y2=\""
      << py(std::pow(10.0, e)) << "\" stroke=\"black\"/>";
    s << "<text x=\"" << ml - 6 << "\" y=\"" << py(std::pow(10.0, e)) + 4 << "\" text-anchor=\"end\">1e"
      << static_cast<int>(e) << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double x = xmax * k / 4.0;
    s << "<text x=\"" << px(x) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">"
      << num(x, 3) << "</text>\n";
  }
  s << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
    << "\" text-anchor=\"middle\">cumulative view-row accesses</text>\n";
  s << "<text x=\"16\" y=\"" << (mt + h - mb) / 2 << "\" transform=\"rotate(-90 16 " << (mt + h - mb) / 2
    << ")\" text-anchor=\"middle\">cost</text>\n";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const char* c = colors[k % 6];
    s << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : runs[k].curve) s << px(p.row_accesses) << ',' << py(p.cost) << ' ';
    s << "\"/>\n";
    for (const auto& p : runs[k].curve)
      s << "<circle cx=\"" << px(p.row_accesses) << "\" cy=\"" << py(p.cost) << "\" r=\"2\" fill=\"" << c << "\"/>";
    s << "\n<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 14 + 16 * k << "\" fill=\"" << c << "\">"
      << runs[k].name << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string rmse_table_md(const std::vector<RunSummary>& runs) {
  const RunSummary& ref = runs.front();
  std::ostringstream s;
  s << "| run | mode | status | iterations | final cost | cost vs " << ref.name << " | row accesses | work vs "
    << ref.name << " | RMSE overall |";
  for (const auto& m : ref.materials) s << " RMSE " << m << " |";
  s << "\n|---|---|---|---|---|---|---|---|---|";
  for (std::size_t m = 0; m < ref.materials.size(); ++m) s << "---|";
  s << "\n";
  for (const auto& r : runs) {
    const double dc = (r.final_cost - ref.final_cost) / std::abs(ref.final_cost);
    s << "| " << r.name << " | " << r.mode << " | " << r.status << " | " << r.curve.back().outer_iter << " | "
      << num(r.final_cost, 8) << " | " << (dc >= 0 ? "+" : "") << num(100.0 * dc, 3) << "% | "
      << static_cast<std::uint64_t>(r.row_accesses) << " | " << num(r.row_accesses / ref.row_accesses, 3) << "x | "
      << num(r.rmse_overall, 5) << " |";
    for (std::size_t m = 0; m < ref.materials.size(); ++m)
      s << ' ' << (m < r.rmse_per_material.size() ? num(r.rmse_per_material[m], 5) : "n/a") << " |";
    s << "\n";
  }
  return s.str();
}

}  // namespace dihs::cli
