// include/scorematch/matching-network.h

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

#ifndef SCOREMATCH_MATCHING_NETWORK_H_
#define SCOREMATCH_MATCHING_NETWORK_H_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorematch/duration-model.h"
#include "scorematch/score-model.h"

namespace scorematch {

struct PathState {
  std::string phoneme;
  double mu_s = 0.0;

  bool operator==(const PathState &) const = default;
};

/// Left-to-right phoneme chain of one candidate score phrase.
struct LyricPath {
  std::string phrase_id;
  RoleType role = RoleType::kDan;
  std::vector<PathState> states;

  bool operator==(const LyricPath &) const = default;
  double TotalSeconds() const;
};

/// K isolated lyric paths; no transitions between paths.
class MatchingNetwork {
 public:
  MatchingNetwork() = default;
  /// Throws ValidationError on an empty path, a non-positive mean or a
  /// duplicated phrase_id.
  explicit MatchingNetwork(std::vector<LyricPath> paths);

  std::size_t K() const { return paths_.size(); }
  bool Empty() const { return paths_.empty(); }
  const std::vector<LyricPath> &Paths() const { return paths_; }
  const LyricPath &Path(std::size_t k) const { return paths_.at(k); }
  /// Index of the path with this phrase_id, or K() if absent.
  std::size_t Find(std::string_view phrase_id) const;

  // Network file: one path per content line,
  //   phrase_id <TAB> role_type <TAB> phoneme mu_s phoneme mu_s ...
  static MatchingNetwork Read(std::istream &is, std::string_view source);
  static MatchingNetwork Load(const std::filesystem::path &path);
  void Write(std::ostream &os) const;

  bool operator==(const MatchingNetwork &other) const {
    return paths_ == other.paths_;
  }

 private:
  std::vector<LyricPath> paths_;
};

/// One LyricPath per phrase; each syllable lasts duration_units *
/// seconds_per_unit and is split among its phonemes by centroid proportion.
/// Errors carry the phrase_id.
MatchingNetwork BuildNetwork(std::span<const ScorePhrase> phrases,
                             const PronunciationDictionary &dict,
                             const DurationStats &stats,
                             double seconds_per_unit = 0.5);

struct DecodableState {
  std::size_t phoneme_index = 0;
  StateDurationDist duration;
};

/// A lyric path with its state durations fitted to one query.
struct DecodablePath {
  std::string phrase_id;
  std::vector<DecodableState> states;

  std::size_t NumStates() const { return states.size(); }
};

/// A path left out of decoding for one query, with the reason.
struct PathExclusion {
  std::string phrase_id;
  std::string reason;
};

struct QueryPaths {
  std::vector<DecodablePath> paths;
  std::vector<PathExclusion> excluded;
};

/// Number of frames covered by `duration_s` at `hop_s` (nearest integer).
int FramesForDuration(double duration_s, double hop_s);

/// Normalizes one path's means to `query_dur_s` and discretizes each state.
DecodablePath InstantiatePath(const LyricPath &path, double query_dur_s,
                              double gamma, double hop_s,
                              const PhonemeInventory &inventory);

/// Instantiates every path of `network` for a query of `query_dur_s`
/// seconds. Paths with more states than query frames are excluded with a
/// warning record instead of failing the query. With `require_support`, so
/// are paths whose truncated duration pmfs cannot add up to the query
/// length (the HSMM cannot decode them; the HMM modes can).
QueryPaths InstantiateForQuery(const MatchingNetwork &network,
                               double query_dur_s, double gamma, double hop_s,
                               const PhonemeInventory &inventory,
                               bool require_support = true);

}  // namespace scorematch

#endif  // SCOREMATCH_MATCHING_NETWORK_H_
