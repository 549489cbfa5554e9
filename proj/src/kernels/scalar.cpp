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
#include <cmath>

#include "phylstm/kernels/kernels.hpp"

namespace phylstm::kernels {
namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * lda + p];
      const double* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
             const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * lda;
    const double* brow = b + p * ldb;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = arow[i];
      double* crow = c + i * ldc;
      for (std::size_t j = 0; j < n; ++j) crow[j] += api * brow[j];
    }
  }
}

inline double sigmoid1(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void sigmoid(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid1(x[i]);
}

void tanh_(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void lstm_forward(std::size_t rows, std::size_t units, double* gates, const double* c_prev,
                  double* c, double* tanh_c, double* h) {
  const std::size_t u = units;
  for (std::size_t r = 0; r < rows; ++r) {
    double* g = gates + r * 4 * u;
    for (std::size_t j = 0; j < u; ++j) {
      const double f = sigmoid1(g[j]);
      const double in = sigmoid1(g[u + j]);
      const double cand = std::tanh(g[2 * u + j]);
      const double o = sigmoid1(g[3 * u + j]);
      g[j] = f;
      g[u + j] = in;
      g[2 * u + j] = cand;
      g[3 * u + j] = o;
      const double cp = c_prev ? c_prev[r * u + j] : 0.0;
      const double ct = f * cp + in * cand;
      const double th = std::tanh(ct);
      c[r * u + j] = ct;
      tanh_c[r * u + j] = th;
      h[r * u + j] = o * th;
    }
  }
}

void lstm_backward(std::size_t rows, std::size_t units, const double* gates, const double* c_prev,
                   const double* tanh_c, const double* dh, double* dc, double* dgates) {
  const std::size_t u = units;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* g = gates + r * 4 * u;
    double* dg = dgates + r * 4 * u;
    for (std::size_t j = 0; j < u; ++j) {
      const std::size_t k = r * u + j;
      const double f = g[j], in = g[u + j], cand = g[2 * u + j], o = g[3 * u + j];
      const double th = tanh_c[k];
      const double cp = c_prev ? c_prev[k] : 0.0;
      const double dct = dc[k] + dh[k] * o * (1.0 - th * th);
      dg[j] = dct * cp * f * (1.0 - f);
      dg[u + j] = dct * cand * in * (1.0 - in);
      dg[2 * u + j] = dct * in * (1.0 - cand * cand);
      dg[3 * u + j] = dh[k] * th * o * (1.0 - o);
      dc[k] = dct * f;
    }
  }
}

}  // namespace

const Backend& scalar() {
  static const Backend backend{"scalar", gemm_nn, gemm_tn, sigmoid, tanh_, lstm_forward,
                               lstm_backward};
  return backend;
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

}  // namespace phylstm::kernels
