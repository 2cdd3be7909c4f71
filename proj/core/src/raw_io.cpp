#include "dihs/raw_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace dihs {

namespace {

static_assert(std::endian::native == std::endian::little, "raw I/O assumes a little-endian host");

template <class T>
void write_raw(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  std::vector<T> buf(values.begin(), values.end());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(T)));
  if (!out) throw IoError("write failed: " + path.string());
}

template <class T>
Vector read_raw(const std::filesystem::path& path, std::optional<std::size_t> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  if (bytes % sizeof(T) != 0) throw IoError(path.string() + ": size is not a multiple of " + std::to_string(sizeof(T)));
  const std::size_t count = bytes / sizeof(T);
  if (expected && *expected != count)
    throw IoError(path.string() + ": holds " + std::to_string(count) + " values, expected " +
                  std::to_string(*expected));
  std::vector<T> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("read failed: " + path.string());
  return Vector(buf.begin(), buf.end());
}

}  // namespace

void write_raw_f32(const std::filesystem::path& path, std::span<const double> values) {
  write_raw<float>(path, values);
}
Vector read_raw_f32(const std::filesystem::path& path, std::optional<std::size_t> expected_count) {
  return read_raw<float>(path, expected_count);
}
void write_raw_f64(const std::filesystem::path& path, std::span<const double> values) {
  write_raw<double>(path, values);
}
Vector read_raw_f64(const std::filesystem::path& path, std::optional<std::size_t> expected_count) {
  return read_raw<double>(path, expected_count);
}

void write_pgm(const std::filesystem::path& path, std::span<const double> image, std::size_t side, double lo,
               double hi) {
  require(image.size() == side * side, "write_pgm: size mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << side << ' ' << side << "\n255\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : image) {
    const double t = std::clamp((v - lo) / span, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace dihs
