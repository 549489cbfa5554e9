/* Copyright 2026 The PhyLSTM Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include "phylstm/simulate/excitation.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>

#include "phylstm/core/error.hpp"

namespace phylstm::simulate {

namespace {

// The FFTW planner is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

struct Spectrum {
  std::size_t n;
  std::unique_ptr<double, FftwFree> real;
  std::unique_ptr<fftw_complex, FftwFree> freq;
  fftw_plan forward = nullptr, backward = nullptr;

  explicit Spectrum(std::size_t size, bool with_inverse)
      : n(size),
        real(static_cast<double*>(fftw_malloc(sizeof(double) * size))),
        freq(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (size / 2 + 1)))) {
    if (!real || !freq) throw_error(ErrorKind::NumericFailure, "fft: allocation failed");
    const int ni = static_cast<int>(size);
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(ni, real.get(), freq.get(), FFTW_ESTIMATE);
    if (with_inverse) backward = fftw_plan_dft_c2r_1d(ni, freq.get(), real.get(), FFTW_ESTIMATE);
  }
  ~Spectrum() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  Spectrum(const Spectrum&) = delete;
  Spectrum& operator=(const Spectrum&) = delete;
};

bool in_band(std::size_t k, std::size_t n, double fs, Band band) {
  const double f = static_cast<double>(k) * fs / static_cast<double>(n);
  return f >= band.low_hz && f <= band.high_hz;
}

}  // namespace

void GroundMotionRecord::validate() const {
  require(dt > 0.0 && std::isfinite(dt), "record " + label + ": dt must be positive");
  require(ag.size() >= 3, "record " + label + ": needs at least 3 samples");
  for (double a : ag) require(std::isfinite(a), "record " + label + ": non-finite sample");
}

std::size_t sample_count(double duration_s, double fs_hz) {
  require(duration_s > 0.0 && fs_hz > 0.0, "sample_count: duration and rate must be positive");
  return static_cast<std::size_t>(std::llround(duration_s * fs_hz)) + 1;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

GroundMotionRecord blwn_generate(RngStream& rng, double duration_s, double fs_hz, double target_rms,
                                 Band band) {
  require(band.low_hz >= 0.0 && band.low_hz < band.high_hz, "blwn: band must satisfy 0 <= low < high");
  require(fs_hz > 2.0 * band.high_hz, "blwn: sampling rate must exceed twice the upper band edge");
  require(target_rms >= 0.0 && std::isfinite(target_rms), "blwn: rms must be finite and non-negative");
  const std::size_t n = sample_count(duration_s, fs_hz);

  GroundMotionRecord rec;
  rec.dt = 1.0 / fs_hz;
  rec.ag.assign(n, 0.0);
  if (target_rms == 0.0) return rec;

  Spectrum fft(n, true);
  double* x = fft.real.get();
  for (std::size_t i = 0; i < n; ++i) x[i] = rng.gaussian();
  fftw_execute(fft.forward);
  fftw_complex* X = fft.freq.get();
  for (std::size_t k = 0; k <= n / 2; ++k)
    if (!in_band(k, n, fs_hz, band)) X[k][0] = X[k][1] = 0.0;
  fftw_execute(fft.backward);

  const double current = rms(std::span<const double>(x, n));
  require(current > 0.0, "blwn: band contains no frequency bins");
  for (std::size_t i = 0; i < n; ++i) rec.ag[i] = x[i] * (target_rms / current);
  return rec;
}

double power_outside_band(std::span<const double> x, double fs_hz, Band band) {
  const std::size_t n = x.size();
  require(n >= 2, "power_outside_band: need at least 2 samples");
  Spectrum fft(n, false);
  std::copy(x.begin(), x.end(), fft.real.get());
  fftw_execute(fft.forward);
  const fftw_complex* X = fft.freq.get();
  double total = 0.0, outside = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    // One-sided periodogram: interior bins stand for two conjugate bins.
    const bool paired = k != 0 && !(n % 2 == 0 && k == n / 2);
    const double p = (X[k][0] * X[k][0] + X[k][1] * X[k][1]) * (paired ? 2.0 : 1.0);
    total += p;
    if (!in_band(k, n, fs_hz, band)) outside += p;
  }
  return total > 0.0 ? outside / total : 0.0;
}

}  // namespace phylstm::simulate
