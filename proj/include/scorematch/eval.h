// include/scorematch/eval.h

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

#ifndef SCOREMATCH_EVAL_H_
#define SCOREMATCH_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorematch/decoder.h"
#include "scorematch/matching-network.h"
#include "scorematch/score-model.h"

namespace scorematch {

enum class DecodeMode { kHsmm, kHmm, kHmmPost };

std::string_view DecodeModeName(DecodeMode mode);
/// "hsmm", "hmm", "hmm-post" (or "hmm_post").
DecodeMode ParseDecodeMode(std::string_view name);

inline constexpr double kDefaultHopSeconds = 0.01;
inline constexpr double kDefaultAlpha = 1.0;
inline constexpr double kDefaultSecondsPerUnit = 0.5;
/// Tuned gamma per mode and role type: 0.1 for HSMM, 0.7 (dan) or 1.5
/// (laosheng) for the post-processor. The plain HMM ignores gamma.
double DefaultGamma(DecodeMode mode, RoleType role);

struct MatchParams {
  DecodeMode mode = DecodeMode::kHsmm;
  double gamma = 0.1;
  double alpha = kDefaultAlpha;
  /// Worker threads for candidate decoding; 0 means hardware concurrency.
  unsigned num_threads = 0;
};

struct RankedCandidate {
  std::string phrase_id;
  double log_score = 0.0;
  /// 1-based.
  int rank = 0;
  std::vector<int> occupancies;
};

struct RankedList {
  /// Descending by log_score; ties by ascending phrase_id.
  std::vector<RankedCandidate> candidates;
  std::vector<PathExclusion> excluded;
};

/// Decodes every path of `network` against `query` and ranks them. Throws
/// ValidationError if no path is decodable for this query.
RankedList RankCandidates(const ObservationMatrix &query,
                          const MatchingNetwork &network,
                          const PhonemeInventory &inventory,
                          const MatchParams &params);

/// Sorts by descending score, ties by ascending phrase_id, and assigns
/// ranks 1..n.
void AssignRanks(std::vector<RankedCandidate> *candidates);

/// 1-based rank of `phrase_id`, or candidates.size() + 1 if it was not
/// ranked (excluded or absent).
int RankOf(const RankedList &list, std::string_view phrase_id);

/// (1/n) sum 1/rank_i.
double Mrr(std::span<const int> ranks);
/// Fraction of ranks <= m.
double TopMHit(std::span<const int> ranks, int m);

/// A posteriorgram with its reference phrase.
struct LabeledQuery {
  std::string query_id;
  ObservationMatrix obs;
  std::string ground_truth;
};

struct QueryResult {
  std::string query_id;
  std::string ground_truth;
  int ground_truth_rank = 0;
  RankedList ranking;
};

struct MatchReport {
  std::vector<QueryResult> queries;
  std::vector<int> top_m;
  double mrr = 0.0;
  /// Parallel to top_m.
  std::vector<double> top_m_hit;

  std::vector<int> Ranks() const;
  /// One JSON object per query, then one summary object.
  void WriteRecords(std::ostream &os, std::size_t max_candidates = 0) const;
  void WriteSummary(std::ostream &os) const;
};

/// Ranks every query and aggregates MRR and Top-M hits.
MatchReport RunMatch(std::span<const LabeledQuery> queries,
                     const MatchingNetwork &network,
                     const PhonemeInventory &inventory,
                     const MatchParams &params, std::vector<int> top_m);

struct GridPoint {
  double alpha = 0.0;
  double gamma = 0.0;
  double mrr = 0.0;
  std::map<RoleType, double> mrr_by_role;
};

struct GridSearchResult {
  DecodeMode mode = DecodeMode::kHsmm;
  std::vector<GridPoint> points;
  /// Highest MRR; ties go to the smallest alpha, then smallest gamma.
  GridPoint best;
  std::map<RoleType, GridPoint> best_by_role;

  void Write(std::ostream &os) const;
};

/// alpha in {0.25, 0.5, ..., 2.0}.
std::vector<double> DefaultAlphaGrid();
/// gamma in {0.1, 0.2, ..., 2.0}.
std::vector<double> DefaultGammaGrid();

/// MRR at every (alpha, gamma) point over the dev queries, overall and per
/// role type of the ground-truth phrase.
GridSearchResult GridSearch(std::span<const LabeledQuery> dev,
                            const MatchingNetwork &network,
                            const PhonemeInventory &inventory, DecodeMode mode,
                            std::span<const double> alpha_grid,
                            std::span<const double> gamma_grid,
                            unsigned num_threads = 0);

// Query-set manifest: `query_id<TAB>obs_file<TAB>ground_truth` per line,
// with obs_file relative to the manifest's directory.
std::vector<LabeledQuery> LoadQuerySet(const std::filesystem::path &manifest);
/// Writes one observation file per query into `dir` plus `dir/queries.tsv`.
void WriteQuerySet(const std::filesystem::path &dir,
                   std::span<const LabeledQuery> queries);

struct SyntheticNetworkOptions {
  std::size_t num_paths = 100;
  std::size_t min_states = 5;
  std::size_t max_states = 20;
  /// State means drawn log-uniformly from this range, seconds.
  double min_mu_s = 0.05;
  double max_mu_s = 0.6;
  std::uint64_t seed = 0;
};

/// Random lyric paths over the inventory's phonemes. Roles alternate
/// dan / laosheng.
MatchingNetwork MakeSyntheticNetwork(const PhonemeInventory &inventory,
                                     const SyntheticNetworkOptions &opts);

struct SyntheticQueryOptions {
  std::size_t num_queries = 50;
  double noise_temp = 0.5;
  /// Duration model used to draw occupancies.
  double gamma = 0.1;
  double hop_s = kDefaultHopSeconds;
  /// Query length is the path's own length times a factor drawn
  /// log-uniformly from [1 / tempo_spread, tempo_spread].
  double tempo_spread = 1.0;
  std::uint64_t seed = 0;
};

/// Picks paths uniformly at random and synthesizes one query from each.
std::vector<LabeledQuery> MakeSyntheticQueries(
    const MatchingNetwork &network, const PhonemeInventory &inventory,
    const SyntheticQueryOptions &opts);

}  // namespace scorematch

#endif  // SCOREMATCH_EVAL_H_
