// include/scorematch/decoder.h

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

#ifndef SCOREMATCH_DECODER_H_
#define SCOREMATCH_DECODER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorematch/matching-network.h"

namespace scorematch {

/// T x P matrix of per-frame natural-log phoneme posteriors.
///
/// Entries may be -inf (zero probability) but never NaN or +inf. Rows are
/// expected to be log-distributions; RowsNormalized() checks that, but the
/// constructor does not insist on it so that shifted or scaled score
/// matrices can be decoded as well.
class ObservationMatrix {
 public:
  ObservationMatrix() = default;
  ObservationMatrix(std::size_t num_frames, std::size_t num_classes,
                    std::vector<double> log_probs, double hop_s);

  std::size_t NumFrames() const { return num_frames_; }
  std::size_t NumClasses() const { return num_classes_; }
  double HopSeconds() const { return hop_s_; }
  double DurationSeconds() const { return num_frames_ * hop_s_; }

  double operator()(std::size_t t, std::size_t p) const {
    return log_probs_[t * num_classes_ + p];
  }
  std::span<const double> Row(std::size_t t) const {
    return {log_probs_.data() + t * num_classes_, num_classes_};
  }
  std::span<const double> Data() const { return log_probs_; }

  /// True if every row exponentiates to a distribution within `tol`.
  bool RowsNormalized(double tol = 1e-6) const;
  /// Copy with `c` added to every entry.
  ObservationMatrix Shifted(double c) const;

  // File: header `T P hop_s`, then T lines of P log-probabilities written
  // with 17 significant digits.
  static ObservationMatrix Read(std::istream &is, std::string_view source);
  static ObservationMatrix Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;

  bool operator==(const ObservationMatrix &) const = default;

 private:
  std::size_t num_frames_ = 0, num_classes_ = 0;
  std::vector<double> log_probs_;
  double hop_s_ = 0.0;
};

/// Best segmentation of one query under one path.
struct DecodeOutcome {
  std::string phrase_id;
  /// Frames spent in each state; all >= 1, summing to T.
  std::vector<int> occupancies;
  double log_posterior = 0.0;
  /// False when every segmentation has zero probability; log_posterior is
  /// then -inf and occupancies hold the lexicographically smallest valid
  /// segmentation.
  bool feasible = true;
};

/// Explicit-duration Viterbi over a left-to-right chain with no self
/// transitions. Maximizes
///   sum_j [ log d_j(u_j) + sum_{t in segment j} obs(t, phoneme_j) ]
/// over u_j in [1, M_j] with sum u_j = T. Among equal-scoring segmentations
/// the lexicographically smallest occupancy vector is returned.
/// Cost is O(T * sum_j M_j). Throws ValidationError if N > T or no
/// segmentation fits the duration supports.
DecodeOutcome HsmmViterbi(const ObservationMatrix &obs,
                          const DecodablePath &path);

/// Self-transition of the baseline HMM for a state of mean `mu_s`:
/// max(0, 1 - hop_s / mu_s), which gives a geometric mean occupancy of
/// mu_s / hop_s frames.
double HmmSelfTransition(double mu_s, double hop_s);

/// Frame-synchronous left-to-right Viterbi with self-transition p_j and
/// forward transition 1 - p_j, including the exit from the last state at
/// frame T. Same tie-break and errors as HsmmViterbi.
DecodeOutcome HmmViterbi(const ObservationMatrix &obs,
                         const DecodablePath &path);

/// log f + alpha * sum_j log N(u_j * hop; mu_j, (gamma mu_j)^2), using each
/// state's mean, gamma and hop. Throws ValidationError if alpha < 0 or the
/// outcome does not belong to the path.
double PostProcessorRescore(const DecodeOutcome &outcome,
                            const DecodablePath &path, double alpha);

/// Number of compositions of `num_frames` into parts u_j in
/// [1, max_frames[j]], saturating at `cap`.
std::uint64_t CountSegmentations(int num_frames,
                                 std::span<const int> max_frames,
                                 std::uint64_t cap = UINT64_MAX);

/// HSMM objective of one explicit segmentation.
double ScoreSegmentation(const ObservationMatrix &obs,
                         const DecodablePath &path,
                         std::span<const int> occupancies);

/// Exhaustive maximization of the HsmmViterbi objective. Throws
/// ValidationError when the number of segmentations exceeds `budget`.
/// If `num_enumerated` is non-null it receives the number scored.
DecodeOutcome BruteForceDecode(const ObservationMatrix &obs,
                               const DecodablePath &path,
                               std::uint64_t budget = 1000000,
                               std::uint64_t *num_enumerated = nullptr);

}  // namespace scorematch

#endif  // SCOREMATCH_DECODER_H_
