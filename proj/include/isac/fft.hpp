#pragma once

#include <cstddef>
#include <span>

#include "isac/common.hpp"

namespace isac {

/// In-place 1-D complex DFT of a fixed size backed by FFTW.
///
/// forward():  X[k] = sum_n x[n] e^{-j 2 pi k n / N}
/// inverse():  x[n] = sum_k X[k] e^{+j 2 pi k n / N}   (no 1/N scaling)
///
/// Plans are created under a global lock; execution is re-entrant, so one
/// Fft per thread is the intended usage.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&& other) noexcept;

  std::size_t size() const { return n_; }

  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

  /// Unitary variants (scaled by 1/sqrt(N)).
  void forward_unitary(std::span<Complex> data) const;
  void inverse_unitary(std::span<Complex> data) const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  void* fwd_ = nullptr;
  void* inv_ = nullptr;
};

/// Cached per-thread transform of size n.
const Fft& thread_fft(std::size_t n);

}  // namespace isac
