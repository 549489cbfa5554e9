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
#include <span>
#include <string>
#include <vector>

#include "phylstm/core/rng.hpp"

namespace phylstm::selection {

struct SpectrumGrid {
  std::vector<double> periods;  // s, strictly ascending
  double damping = 0.05;

  /// `count` log-spaced periods over [t_min, t_max], endpoints included.
  static SpectrumGrid log_spaced(std::size_t count = 50, double t_min = 0.05, double t_max = 10.0,
                                 double damping = 0.05);
  void validate() const;
};

/// Peak absolute total acceleration of a unit-mass linear oscillator at each
/// grid period, starting from rest. The excitation is linear between samples
/// and each step is integrated exactly for that interpolant.
std::vector<double> response_spectrum(std::span<const double> ag, double dt, const SpectrumGrid& grid);

using Matrix = std::vector<std::vector<double>>;  // rows are records

/// Spectra of several records, computed record-parallel.
Matrix response_spectra(const std::vector<std::span<const double>>& records, double dt,
                        const SpectrumGrid& grid, std::size_t threads = 1);

/// Per-column z-score across rows. Columns with zero spread become zero.
Matrix standardize(const Matrix& rows);

struct ClusterResult {
  std::size_t k = 0;
  Matrix centroids;
  std::vector<std::size_t> assignment;  // cluster per record
  std::vector<double> inertia;          // after each assignment step
  std::size_t iterations = 0;
  bool converged = false;  // assignment reached a fixed point
};

/// k-means++ seeding, then Lloyd iterations until the assignment stops
/// changing or `max_iter` updates have run. Distance ties go to the lowest
/// cluster index. A cluster that loses all members keeps its centroid.
/// Throws NumericFailure if inertia ever increases.
ClusterResult kmeans_cluster(const Matrix& points, std::size_t k, RngStream& rng,
                             std::size_t max_iter = 300);

/// Index of the member closest to each centroid, ties to the lowest record
/// index. Throws DegenerateClustering when a cluster has no members.
std::vector<std::size_t> select_representatives(const ClusterResult& result, const Matrix& points);

/// id, scale, Sa per period, cluster, representative (0/1).
std::string selection_csv(const std::vector<std::string>& ids, const std::vector<double>& scales,
                          const SpectrumGrid& grid, const Matrix& spectra,
                          const ClusterResult& clusters, const std::vector<std::size_t>& representatives);

}  // namespace phylstm::selection
