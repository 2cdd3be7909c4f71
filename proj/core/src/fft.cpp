#include "dihs/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <new>

#include "dihs/common.hpp"

namespace dihs {

namespace {
// FFTW's planner is not thread-safe; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

ComplexBuffer::ComplexBuffer(std::size_t n) : size_(n) {
  auto* p = static_cast<Complex*>(fftw_malloc(sizeof(Complex) * std::max<std::size_t>(n, 1)));
  if (p == nullptr) throw std::bad_alloc();
  data_.reset(p);
  zero();
}

void ComplexBuffer::Free::operator()(Complex* p) const { fftw_free(p); }

void ComplexBuffer::zero() { std::fill(data_.get(), data_.get() + size_, Complex{}); }

Fft::Fft(std::size_t n, Rank rank) : n_(n), rank_(rank) {
  require(n >= 1, "Fft: size must be positive");
  ComplexBuffer scratch(size());
  auto* io = reinterpret_cast<fftw_complex*>(scratch.data());
  const int ni = static_cast<int>(n);
  std::lock_guard lock(planner_mutex());
  if (rank == Rank::One) {
    forward_plan_ = fftw_plan_dft_1d(ni, io, io, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft_1d(ni, io, io, FFTW_BACKWARD, FFTW_ESTIMATE);
  } else {
    forward_plan_ = fftw_plan_dft_2d(ni, ni, io, io, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft_2d(ni, ni, io, io, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  if (forward_plan_ == nullptr || backward_plan_ == nullptr) throw std::runtime_error("Fft: planning failed");
}

Fft::~Fft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void Fft::forward(ComplexBuffer& buf) const {
  require(buf.size() == size(), "Fft::forward: buffer size mismatch");
  auto* io = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), io, io);
}

void Fft::backward(ComplexBuffer& buf) const {
  require(buf.size() == size(), "Fft::backward: buffer size mismatch");
  auto* io = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), io, io);
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace dihs
