// include/scorematch/duration-model.h

// Copyright 2026  The scorematch Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SCOREMATCH_DURATION_MODEL_H_
#define SCOREMATCH_DURATION_MODEL_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorematch/score-model.h"

namespace scorematch {

/// Per-phoneme duration centroids (mean annotated duration, seconds).
struct DurationStats {
  std::map<std::string, double, std::less<>> centroids;
  std::map<std::string, std::size_t, std::less<>> counts;

  /// Throws ValidationError naming the phoneme if it has no centroid.
  double Centroid(std::string_view phoneme) const;

  // File format: `phoneme<TAB>centroid_s<TAB>count` per line.
  static DurationStats Read(std::istream &is, std::string_view source);
  static DurationStats Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;
};

DurationStats ComputeDurationStats(std::span<const AnnotationRecord> records);

/// Splits a syllable duration among its phonemes in proportion to their
/// centroids. The result sums to `syllable_dur_s`.
std::vector<double> SplitSyllableDuration(
    double syllable_dur_s, std::span<const std::string> phonemes,
    const DurationStats &stats);

/// Rescales `durations_s` so that they sum to `query_dur_s`.
std::vector<double> NormalizePathDurations(std::span<const double> durations_s,
                                           double query_dur_s);

/// Discrete occupancy distribution d(u), u = 1..M frames, of one state.
///
/// Built from a Gaussian with mean mu_s and standard deviation gamma * mu_s
/// evaluated at u * hop_s and renormalized over the truncated support.
class StateDurationDist {
 public:
  /// Gaussian discretization; M = ceil((mu + 4 gamma mu) / hop), M >= 1.
  static StateDurationDist Discretize(double mu_s, double gamma,
                                      double hop_s);
  /// Arbitrary occupancy pmf over u = 1..pmf.size(). Entries must be
  /// non-negative and sum to 1 within 1e-9. `mu_s` and `gamma` are kept for
  /// post-processor rescoring.
  static StateDurationDist FromPmf(std::vector<double> pmf, double mu_s,
                                   double gamma, double hop_s);

  double MuSeconds() const { return mu_s_; }
  double Gamma() const { return gamma_; }
  double HopSeconds() const { return hop_s_; }
  /// Support upper bound M, in frames.
  int MaxFrames() const { return static_cast<int>(pmf_.size()); }
  /// d(u); zero outside 1..M.
  double Pmf(int u) const;
  /// log d(u); -inf outside 1..M or where d(u) = 0.
  double LogPmf(int u) const;
  std::span<const double> PmfValues() const { return pmf_; }
  /// Smallest u maximizing d(u).
  int Mode() const;

 private:
  double mu_s_ = 0.0, gamma_ = 0.0, hop_s_ = 0.0;
  std::vector<double> pmf_, log_pmf_;
};

/// (1 - p_self) * p_self^(u - 1), for 0 <= p_self < 1 and u >= 1.
double GeometricOccupancy(double p_self, int u);

/// log of the continuous Gaussian density N(x; mu, (gamma mu)^2).
double LogGaussianDurationDensity(double x_s, double mu_s, double gamma);

}  // namespace scorematch

#endif  // SCOREMATCH_DURATION_MODEL_H_
