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

namespace phylstm::simulate {

struct GroundMotionRecord {
  std::string label;
  double dt = 0.02;
  std::vector<double> ag;  // m/s^2
  double scale = 1.0;      // intensity factor already applied to ag

  void validate() const;
};

struct Band {
  double low_hz = 0.1;
  double high_hz = 20.0;
};

/// Samples in a record of the given duration, counting both endpoints.
std::size_t sample_count(double duration_s, double fs_hz);

/// Band-limited white noise: Gaussian samples, zeroed outside `band` in the
/// frequency domain, then scaled to the requested RMS. A zero RMS gives an
/// all-zero record.
GroundMotionRecord blwn_generate(RngStream& rng, double duration_s, double fs_hz,
                                 double rms, Band band = {});

/// Fraction of signal power (one-sided periodogram, DC included)
/// lying outside `band`.
double power_outside_band(std::span<const double> x, double fs_hz, Band band);

double rms(std::span<const double> x);

}  // namespace phylstm::simulate
