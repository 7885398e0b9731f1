#include "isac/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace isac {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw InvalidParameter("Fft: size must be positive");
  std::lock_guard lock(planner_mutex());
  // Dummy aligned buffer for planning; execution uses fftw_execute_dft on
  // caller data, which FFTW permits with FFTW_UNALIGNED.
  fftw_complex* buf = fftw_alloc_complex(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
  inv_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
}

Fft::~Fft() { release(); }

Fft::Fft(Fft&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      fwd_(std::exchange(other.fwd_, nullptr)),
      inv_(std::exchange(other.inv_, nullptr)) {}

Fft& Fft::operator=(Fft&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    fwd_ = std::exchange(other.fwd_, nullptr);
    inv_ = std::exchange(other.inv_, nullptr);
  }
  return *this;
}

void Fft::release() noexcept {
  if (!fwd_ && !inv_) return;
  std::lock_guard lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  if (inv_) fftw_destroy_plan(static_cast<fftw_plan>(inv_));
  fwd_ = inv_ = nullptr;
}

void Fft::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw InvalidParameter("Fft::forward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::inverse(std::span<Complex> data) const {
  if (data.size() != n_) throw InvalidParameter("Fft::inverse: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inv_), as_fftw(data.data()), as_fftw(data.data()));
}

void Fft::forward_unitary(std::span<Complex> data) const {
  forward(data);
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (auto& v : data) v *= s;
}

void Fft::inverse_unitary(std::span<Complex> data) const {
  inverse(data);
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (auto& v : data) v *= s;
}

const Fft& thread_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

}  // namespace isac
