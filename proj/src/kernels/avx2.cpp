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
// AVX2+FMA kernels. Compiled with function-level target attributes so the
// rest of the library stays baseline x86-64; dispatch.cpp only hands these
// out after checking CPUID.

#include "phylstm/kernels/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define PHYLSTM_HAVE_AVX2 1
#include <immintrin.h>

#include <algorithm>
#include <cmath>

#define PHYLSTM_AVX2 __attribute__((target("avx2,fma")))

namespace phylstm::kernels {
namespace {

PHYLSTM_AVX2 inline __m256d vexp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);
  // Taylor series to degree 12 on |r| <= ln2/2; truncation < 2e-16.
  __m256d p = _mm256_set1_pd(1.0 / 479001600.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  const __m128i ki = _mm256_cvtpd_epi32(k);
  __m256i bits = _mm256_add_epi64(_mm256_cvtepi32_epi64(ki), _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
}

PHYLSTM_AVX2 inline __m256d vsigmoid(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = vexp(_mm256_sub_pd(_mm256_setzero_pd(), x));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

PHYLSTM_AVX2 inline __m256d vtanh(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);
  const __m256d e = vexp(_mm256_add_pd(ax, ax));
  const __m256d t = _mm256_sub_pd(one, _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(e, one)));
  return _mm256_or_pd(t, _mm256_and_pd(sign_mask, x));
}

inline double sigmoid1(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Register-blocked C += op(A) * B over one k panel. `AT` selects A^T
// (A stored [k x m]).
template <bool AT>
PHYLSTM_AVX2 void gemm_panel(std::size_t m, std::size_t n, std::size_t k, const double* a,
                       std::size_t lda, const double* b, std::size_t ldb, double* c,
                       std::size_t ldc) {
  auto a_at = [&](std::size_t i, std::size_t p) { return AT ? a[p * lda + i] : a[i * lda + p]; };
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d acc[4][2];
      for (int r = 0; r < 4; ++r) {
        acc[r][0] = _mm256_loadu_pd(c + (i + r) * ldc + j);
        acc[r][1] = _mm256_loadu_pd(c + (i + r) * ldc + j + 4);
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * ldb + j + 4);
        for (int r = 0; r < 4; ++r) {
          const __m256d av = _mm256_set1_pd(a_at(i + r, p));
          acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
          acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
        }
      }
      for (int r = 0; r < 4; ++r) {
        _mm256_storeu_pd(c + (i + r) * ldc + j, acc[r][0]);
        _mm256_storeu_pd(c + (i + r) * ldc + j + 4, acc[r][1]);
      }
    }
    for (; j + 4 <= n; j += 4) {
      __m256d acc[4];
      for (int r = 0; r < 4; ++r) acc[r] = _mm256_loadu_pd(c + (i + r) * ldc + j);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
        for (int r = 0; r < 4; ++r)
          acc[r] = _mm256_fmadd_pd(_mm256_set1_pd(a_at(i + r, p)), b0, acc[r]);
      }
      for (int r = 0; r < 4; ++r) _mm256_storeu_pd(c + (i + r) * ldc + j, acc[r]);
    }
    for (; j < n; ++j)
      for (int r = 0; r < 4; ++r) {
        double s = c[(i + r) * ldc + j];
        for (std::size_t p = 0; p < k; ++p) s = std::fma(a_at(i + r, p), b[p * ldb + j], s);
        c[(i + r) * ldc + j] = s;
      }
  }
  for (; i < m; ++i) {
    double* crow = c + i * ldc;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_loadu_pd(crow + j);
      for (std::size_t p = 0; p < k; ++p)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(a_at(i, p)), _mm256_loadu_pd(b + p * ldb + j), acc);
      _mm256_storeu_pd(crow + j, acc);
    }
    for (; j < n; ++j) {
      double s = crow[j];
      for (std::size_t p = 0; p < k; ++p) s = std::fma(a_at(i, p), b[p * ldb + j], s);
      crow[j] = s;
    }
  }
}

// Splits k into panels that stay cache resident. C accumulates panels in
// order, so results match the unsplit loop bit for bit.
template <bool AT>
PHYLSTM_AVX2 void gemm(std::size_t m, std::size_t n, std::size_t k, const double* a,
                       std::size_t lda, const double* b, std::size_t ldb, double* c,
                       std::size_t ldc) {
  constexpr std::size_t kPanel = 128;
  for (std::size_t p0 = 0; p0 < k; p0 += kPanel) {
    const std::size_t kc = std::min(kPanel, k - p0);
    gemm_panel<AT>(m, n, kc, AT ? a + p0 * lda : a + p0, lda, b + p0 * ldb, ldb, c, ldc);
  }
}

PHYLSTM_AVX2 void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                          std::size_t lda, const double* b, std::size_t ldb, double* c,
                          std::size_t ldc) {
  gemm<false>(m, n, k, a, lda, b, ldb, c, ldc);
}

PHYLSTM_AVX2 void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
                          std::size_t lda, const double* b, std::size_t ldb, double* c,
                          std::size_t ldc) {
  gemm<true>(m, n, k, a, lda, b, ldb, c, ldc);
}

PHYLSTM_AVX2 void sigmoid(std::size_t n, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, vsigmoid(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = sigmoid1(x[i]);
}

PHYLSTM_AVX2 void tanh_(std::size_t n, const double* x, double* y) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, vtanh(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = std::tanh(x[i]);
}

PHYLSTM_AVX2 void lstm_forward(std::size_t rows, std::size_t units, double* gates,
                               const double* c_prev, double* c, double* tanh_c, double* h) {
  const std::size_t u = units;
  for (std::size_t r = 0; r < rows; ++r) {
    double* g = gates + r * 4 * u;
    const double* cp = c_prev ? c_prev + r * u : nullptr;
    double* cr = c + r * u;
    double* tr = tanh_c + r * u;
    double* hr = h + r * u;
    std::size_t j = 0;
    for (; j + 4 <= u; j += 4) {
      const __m256d f = vsigmoid(_mm256_loadu_pd(g + j));
      const __m256d in = vsigmoid(_mm256_loadu_pd(g + u + j));
      const __m256d cand = vtanh(_mm256_loadu_pd(g + 2 * u + j));
      const __m256d o = vsigmoid(_mm256_loadu_pd(g + 3 * u + j));
      _mm256_storeu_pd(g + j, f);
      _mm256_storeu_pd(g + u + j, in);
      _mm256_storeu_pd(g + 2 * u + j, cand);
      _mm256_storeu_pd(g + 3 * u + j, o);
      __m256d ct = _mm256_mul_pd(in, cand);
      if (cp) ct = _mm256_fmadd_pd(f, _mm256_loadu_pd(cp + j), ct);
      const __m256d th = vtanh(ct);
      _mm256_storeu_pd(cr + j, ct);
      _mm256_storeu_pd(tr + j, th);
      _mm256_storeu_pd(hr + j, _mm256_mul_pd(o, th));
    }
    for (; j < u; ++j) {
      const double f = sigmoid1(g[j]);
      const double in = sigmoid1(g[u + j]);
      const double cand = std::tanh(g[2 * u + j]);
      const double o = sigmoid1(g[3 * u + j]);
      g[j] = f;
      g[u + j] = in;
      g[2 * u + j] = cand;
      g[3 * u + j] = o;
      const double ct = (cp ? f * cp[j] : 0.0) + in * cand;
      cr[j] = ct;
      tr[j] = std::tanh(ct);
      hr[j] = o * tr[j];
    }
  }
}

PHYLSTM_AVX2 void lstm_backward(std::size_t rows, std::size_t units, const double* gates,
                                const double* c_prev, const double* tanh_c, const double* dh,
                                double* dc, double* dgates) {
  const std::size_t u = units;
  const __m256d one = _mm256_set1_pd(1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = gates + r * 4 * u;
    double* dg = dgates + r * 4 * u;
    const double* cp = c_prev ? c_prev + r * u : nullptr;
    const double* tr = tanh_c + r * u;
    const double* dhr = dh + r * u;
    double* dcr = dc + r * u;
    std::size_t j = 0;
    for (; j + 4 <= u; j += 4) {
      const __m256d f = _mm256_loadu_pd(g + j);
      const __m256d in = _mm256_loadu_pd(g + u + j);
      const __m256d cand = _mm256_loadu_pd(g + 2 * u + j);
      const __m256d o = _mm256_loadu_pd(g + 3 * u + j);
      const __m256d th = _mm256_loadu_pd(tr + j);
      const __m256d dhv = _mm256_loadu_pd(dhr + j);
      const __m256d cpv = cp ? _mm256_loadu_pd(cp + j) : _mm256_setzero_pd();
      const __m256d dct = _mm256_fmadd_pd(_mm256_mul_pd(dhv, o), _mm256_fnmadd_pd(th, th, one),
                                          _mm256_loadu_pd(dcr + j));
      _mm256_storeu_pd(dg + j,
                       _mm256_mul_pd(_mm256_mul_pd(dct, cpv),
                                     _mm256_mul_pd(f, _mm256_sub_pd(one, f))));
      _mm256_storeu_pd(dg + u + j,
                       _mm256_mul_pd(_mm256_mul_pd(dct, cand),
                                     _mm256_mul_pd(in, _mm256_sub_pd(one, in))));
      _mm256_storeu_pd(dg + 2 * u + j,
                       _mm256_mul_pd(_mm256_mul_pd(dct, in), _mm256_fnmadd_pd(cand, cand, one)));
      _mm256_storeu_pd(dg + 3 * u + j,
                       _mm256_mul_pd(_mm256_mul_pd(dhv, th),
                                     _mm256_mul_pd(o, _mm256_sub_pd(one, o))));
      _mm256_storeu_pd(dcr + j, _mm256_mul_pd(dct, f));
    }
    for (; j < u; ++j) {
      const double f = g[j], in = g[u + j], cand = g[2 * u + j], o = g[3 * u + j];
      const double th = tr[j];
      const double cpj = cp ? cp[j] : 0.0;
      const double dct = dcr[j] + dhr[j] * o * (1.0 - th * th);
      dg[j] = dct * cpj * f * (1.0 - f);
      dg[u + j] = dct * cand * in * (1.0 - in);
      dg[2 * u + j] = dct * in * (1.0 - cand * cand);
      dg[3 * u + j] = dhr[j] * th * o * (1.0 - o);
      dcr[j] = dct * f;
    }
  }
}

}  // namespace

const Backend* avx2() {
  static const Backend backend{"avx2", gemm_nn, gemm_tn, sigmoid, tanh_, lstm_forward,
                               lstm_backward};
  static const bool supported = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return supported ? &backend : nullptr;
}

}  // namespace phylstm::kernels

#else

namespace phylstm::kernels {
const Backend* avx2() { return nullptr; }
}  // namespace phylstm::kernels

#endif
