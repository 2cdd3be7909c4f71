#pragma once

#include <filesystem>
#include <istream>
#include <stdexcept>

#include "dihs/spectral_model.hpp"

namespace dihs {

/// Malformed input file; the message carries "<source>:<line>: ...".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads `energy_keV,flux,bin_1,...,bin_Nb` (one row per energy).
SpectrumTable read_spectrum_csv(std::istream& in, const std::string& source = "<spectrum>");
SpectrumTable load_spectrum_csv(const std::filesystem::path& path);

/// Reads `energy_keV,<material>...` and picks the rows matching `energies`
/// (to 1e-6 keV); every requested energy must be present.
MaterialBasis read_materials_csv(std::istream& in, std::span<const double> energies,
                                 const std::string& source = "<materials>");
MaterialBasis load_materials_csv(const std::filesystem::path& path, std::span<const double> energies);

}  // namespace dihs
