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
#pragma once

#include <cstddef>
#include <string_view>

namespace phylstm::kernels {

/// Table of the data-parallel inner loops. Every backend computes the same
/// math; the scalar table is the reference the SIMD tables are tested against.
///
/// Matrices are row-major with explicit leading dimensions. The GEMM entries
/// accumulate into C.
struct Backend {
  std::string_view name;

  /// C[m x n] += A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);

  /// C[m x n] += A^T * B with A stored [k x m] and B stored [k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  std::size_t lda, const double* b, std::size_t ldb, double* c,
                  std::size_t ldc);

  void (*sigmoid)(std::size_t n, const double* x, double* y);
  void (*tanh)(std::size_t n, const double* x, double* y);

  /// LSTM gate nonlinearity for `rows` samples of width `units`.
  ///
  /// `gates` holds pre-activations laid out [f | i | c~ | o] per row and is
  /// overwritten with the activated values. `c_prev` may be null (zero state).
  /// Writes c_t, tanh(c_t) and h_t.
  void (*lstm_forward)(std::size_t rows, std::size_t units, double* gates,
                       const double* c_prev, double* c, double* tanh_c, double* h);

  /// Backward of lstm_forward. `dc` holds the cell-state gradient flowing in
  /// from step t+1 on entry and the gradient with respect to c_{t-1} on exit.
  /// Writes pre-activation gradients in gate layout to `dgates`.
  void (*lstm_backward)(std::size_t rows, std::size_t units, const double* gates,
                        const double* c_prev, const double* tanh_c, const double* dh,
                        double* dc, double* dgates);
};

const Backend& scalar();

/// AVX2+FMA backend, or null when the CPU (or the build) lacks it.
const Backend* avx2();

/// Backend used by the library. Chosen once: AVX2 when the CPU supports it,
/// scalar otherwise. PHYLSTM_SIMD=scalar in the environment forces scalar.
const Backend& active();

/// Overrides the active backend (tests and benchmarks).
void set_active(const Backend& backend);

/// Transposes a [rows x cols] row-major block into dst [cols x rows].
void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst);

}  // namespace phylstm::kernels
