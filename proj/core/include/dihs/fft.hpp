#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace dihs {

using Complex = std::complex<double>;

/// Heap buffer of complex samples with the alignment FFTW plans expect.
class ComplexBuffer {
 public:
  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t n);

  Complex* data() { return data_.get(); }
  const Complex* data() const { return data_.get(); }
  std::size_t size() const { return size_; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  std::span<Complex> span() { return {data_.get(), size_}; }
  void zero();

 private:
  struct Free {
    void operator()(Complex* p) const;
  };
  std::unique_ptr<Complex[], Free> data_;
  std::size_t size_ = 0;
};

/// Unnormalized in-place complex FFT of a fixed shape (1-D of length n, or
/// 2-D n x n row-major). forward: sum x e^{-2 pi i k.u / n};
/// backward: sum X e^{+2 pi i k.u / n}. Plans are created once and executed
/// on caller buffers, so one instance may be shared across threads.
class Fft {
 public:
  enum class Rank { One, Two };

  Fft(std::size_t n, Rank rank);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t n() const { return n_; }
  std::size_t size() const { return rank_ == Rank::One ? n_ : n_ * n_; }

  void forward(ComplexBuffer& buf) const;
  void backward(ComplexBuffer& buf) const;

 private:
  std::size_t n_;
  Rank rank_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

std::size_t next_pow2(std::size_t n);

}  // namespace dihs
