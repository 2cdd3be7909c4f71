#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>

#include "dihs/common.hpp"

namespace dihs {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian float32, no header.
void write_raw_f32(const std::filesystem::path& path, std::span<const double> values);
Vector read_raw_f32(const std::filesystem::path& path, std::optional<std::size_t> expected_count = std::nullopt);

/// Little-endian float64, no header (lossless; used for reconstructions).
void write_raw_f64(const std::filesystem::path& path, std::span<const double> values);
Vector read_raw_f64(const std::filesystem::path& path, std::optional<std::size_t> expected_count = std::nullopt);

/// 8-bit binary PGM of a side x side image mapped linearly from [lo, hi].
void write_pgm(const std::filesystem::path& path, std::span<const double> image, std::size_t side, double lo,
               double hi);

}  // namespace dihs
