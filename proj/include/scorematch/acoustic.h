// include/scorematch/acoustic.h

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

#ifndef SCOREMATCH_ACOUSTIC_H_
#define SCOREMATCH_ACOUSTIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorematch/decoder.h"
#include "scorematch/matching-network.h"
#include "scorematch/score-model.h"

namespace scorematch {

/// T x D frame features (e.g. MFCCs with deltas), all finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t num_frames, std::size_t dim,
                std::vector<double> data, double hop_s);

  std::size_t NumFrames() const { return num_frames_; }
  std::size_t Dim() const { return dim_; }
  double HopSeconds() const { return hop_s_; }
  std::span<const double> Row(std::size_t t) const {
    return {data_.data() + t * dim_, dim_};
  }
  std::span<const double> Data() const { return data_; }

  // File: header `T D hop_s`, then T rows of D decimals.
  static FeatureMatrix Read(std::istream &is, std::string_view source);
  static FeatureMatrix Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;

 private:
  std::size_t num_frames_ = 0, dim_ = 0;
  std::vector<double> data_;
  double hop_s_ = 0.0;
};

/// Diagonal-covariance mixture of one phoneme class. means and variances are
/// row-major K x D.
struct DiagGmm {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;

  std::size_t NumComponents() const { return weights.size(); }
  /// log sum_k w_k N(x; mean_k, diag(var_k)).
  double LogLikelihood(std::span<const double> x) const;
};

/// One DiagGmm per phoneme class plus class priors.
struct GmmModel {
  std::size_t dim = 0;
  std::vector<std::string> labels;
  std::vector<double> priors;
  std::vector<DiagGmm> classes;

  std::size_t NumClasses() const { return labels.size(); }
  /// Throws ValidationError on inconsistent sizes, weights or priors off
  /// the simplex by more than 1e-9, or non-positive variances.
  void Validate() const;
  /// Copy with classes permuted into inventory order. The label sets must
  /// be identical.
  GmmModel ReorderedFor(const PhonemeInventory &inventory) const;

  // Versioned text format, numbers at 17 significant digits:
  //   scorematch-gmm 1
  //   D P
  //   class <label> <prior> <K>      (repeated P times, each followed by
  //   <weight> <D means> <D variances> K component lines)
  static GmmModel Read(std::istream &is, std::string_view source);
  static GmmModel Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;

  bool operator==(const GmmModel &) const;
};

struct GmmFitOptions {
  int components = 40;
  int max_iters = 50;
  std::uint64_t seed = 0;
  double variance_floor = 1e-4;
  /// Stop once the mean per-frame log-likelihood gains less than this.
  double tolerance = 1e-6;
};

/// EM for one class, initialized by seeded k-means++. If `history` is not
/// null it receives the mean per-frame log-likelihood after initialization
/// and after every EM iteration.
DiagGmm FitDiagGmm(const FeatureMatrix &frames, const GmmFitOptions &opts,
                   std::vector<double> *history = nullptr);

/// Fits every class independently; priors are class frame proportions.
/// Classes come out in key order. Throws ValidationError naming a class
/// with fewer frames than components.
GmmModel FitGmmEm(const std::map<std::string, FeatureMatrix> &by_class,
                  const GmmFitOptions &opts,
                  std::map<std::string, std::vector<double>> *history =
                      nullptr);

/// Per-frame log class posteriors, one column per model class.
ObservationMatrix Posteriorize(const FeatureMatrix &features,
                               const GmmModel &model);

/// Fraction of frames whose argmax class (lowest index on ties) equals the
/// label.
double FrameAccuracy(const ObservationMatrix &obs,
                     std::span<const std::size_t> labels);

struct SynthOptions {
  double noise_temp = 0.0;
  std::uint64_t seed = 0;
  /// Use each state's pmf mode instead of sampling its occupancy.
  bool occupancy_at_mode = false;
};

struct SynthQuery {
  ObservationMatrix obs;
  std::vector<int> occupancies;
  /// Phoneme class of every frame.
  std::vector<std::size_t> frame_labels;
};

/// Synthesizes a posteriorgram for `path` over `num_classes` classes.
SynthQuery SynthesizeQuery(const DecodablePath &path, std::size_t num_classes,
                           const SynthOptions &opts);

}  // namespace scorematch

#endif  // SCOREMATCH_ACOUSTIC_H_
