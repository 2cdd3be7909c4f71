#include "dihs/tables.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace dihs {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v))
    throw ParseError(where + ": '" + cell + "' is not a finite decimal number");
  return v;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Csv read_numeric_csv(std::istream& in, const std::string& source) {
  Csv csv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (csv.header.empty()) {
      csv.header = std::move(cells);
      continue;
    }
    if (cells.size() != csv.header.size())
      throw ParseError(where + ": expected " + std::to_string(csv.header.size()) + " columns, found " +
                       std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, where));
    csv.rows.push_back(std::move(row));
  }
  if (csv.header.empty()) throw ParseError(source + ": empty file");
  if (csv.rows.empty()) throw ParseError(source + ": no data rows");
  if (csv.header[0] != "energy_keV") throw ParseError(source + ":1: first column must be 'energy_keV'");
  return csv;
}

}  // namespace

SpectrumTable read_spectrum_csv(std::istream& in, const std::string& source) {
  const Csv csv = read_numeric_csv(in, source);
  if (csv.header.size() < 3 || csv.header[1] != "flux")
    throw ParseError(source + ":1: header must be energy_keV,flux,bin_1,...");
  for (std::size_t b = 2; b < csv.header.size(); ++b)
    if (csv.header[b] != "bin_" + std::to_string(b - 1))
      throw ParseError(source + ":1: expected column 'bin_" + std::to_string(b - 1) + "', found '" + csv.header[b] + "'");
  const std::size_t ne = csv.rows.size(), nb = csv.header.size() - 2;
  SpectrumTable t;
  t.energies.resize(ne);
  t.source_flux.resize(ne);
  t.detector_response.resize(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(ne));
  for (std::size_t e = 0; e < ne; ++e) {
    t.energies[e] = csv.rows[e][0];
    t.source_flux[e] = csv.rows[e][1];
    for (std::size_t b = 0; b < nb; ++b)
      t.detector_response(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(e)) = csv.rows[e][2 + b];
    if (e > 0 && !(t.energies[e] > t.energies[e - 1]))
      throw ParseError(source + ": energies must be strictly increasing (row " + std::to_string(e + 1) + ")");
  }
  try {
    t.validate();
  } catch (const ContractError& err) {
    throw ParseError(source + ": " + err.what());
  }
  return t;
}

SpectrumTable load_spectrum_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spectrum file " + path.string());
  return read_spectrum_csv(in, path.string());
}

MaterialBasis read_materials_csv(std::istream& in, std::span<const double> energies, const std::string& source) {
  const Csv csv = read_numeric_csv(in, source);
  if (csv.header.size() < 2) throw ParseError(source + ":1: no material columns");
  MaterialBasis basis;
  basis.names.assign(csv.header.begin() + 1, csv.header.end());
  const auto nm = static_cast<Eigen::Index>(basis.names.size());
  basis.attenuation.resize(static_cast<Eigen::Index>(energies.size()), nm);
  for (std::size_t e = 0; e < energies.size(); ++e) {
    const std::vector<double>* match = nullptr;
    for (const auto& row : csv.rows)
      if (std::abs(row[0] - energies[e]) <= 1e-6) match = &row;
    if (match == nullptr)
      throw ParseError(source + ": no attenuation row for energy " + std::to_string(energies[e]) + " keV");
    for (Eigen::Index m = 0; m < nm; ++m) basis.attenuation(static_cast<Eigen::Index>(e), m) = (*match)[1 + m];
  }
  try {
    basis.validate();
  } catch (const ContractError& err) {
    throw ParseError(source + ": " + err.what());
  }
  return basis;
}

MaterialBasis load_materials_csv(const std::filesystem::path& path, std::span<const double> energies) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open materials file " + path.string());
  return read_materials_csv(in, energies, path.string());
}

}  // namespace dihs
