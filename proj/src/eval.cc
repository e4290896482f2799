// src/eval.cc

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

#include "scorematch/eval.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

#include "json.hpp"
#include "random-util.h"
#include "scorematch/acoustic.h"
#include "scorematch/text-io.h"

namespace scorematch {

namespace {

// Runs fn(i) for i in [0, n) on up to `num_threads` workers. Each index is
// handled exactly once; callers write results into per-index slots so the
// outcome never depends on scheduling. The first exception is rethrown.
void ParallelFor(std::size_t n, unsigned num_threads,
                 const std::function<void(std::size_t)> &fn) {
  if (num_threads == 0) num_threads = std::thread::hardware_concurrency();
  num_threads = std::max(1u, std::min<unsigned>(num_threads, n));
  if (num_threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < num_threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto &w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

DecodeOutcome DecodeWith(DecodeMode mode, const ObservationMatrix &obs,
                         const DecodablePath &path) {
  return mode == DecodeMode::kHsmm ? HsmmViterbi(obs, path)
                                   : HmmViterbi(obs, path);
}

void CheckQuery(const ObservationMatrix &query,
                const PhonemeInventory &inventory) {
  if (query.NumClasses() != inventory.Size())
    throw ValidationError("query has " + std::to_string(query.NumClasses()) +
                          " classes but the inventory has " +
                          std::to_string(inventory.Size()));
}

}  // namespace

std::string_view DecodeModeName(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kHsmm: return "hsmm";
    case DecodeMode::kHmm: return "hmm";
    case DecodeMode::kHmmPost: return "hmm-post";
  }
  return "?";
}

DecodeMode ParseDecodeMode(std::string_view name) {
  if (name == "hsmm") return DecodeMode::kHsmm;
  if (name == "hmm") return DecodeMode::kHmm;
  if (name == "hmm-post" || name == "hmm_post") return DecodeMode::kHmmPost;
  throw ValidationError("unknown decode mode '" + std::string(name) + "'");
}

double DefaultGamma(DecodeMode mode, RoleType role) {
  if (mode == DecodeMode::kHmmPost)
    return role == RoleType::kDan ? 0.7 : 1.5;
  return 0.1;
}

void AssignRanks(std::vector<RankedCandidate> *candidates) {
  std::sort(candidates->begin(), candidates->end(),
            [](const RankedCandidate &a, const RankedCandidate &b) {
              if (a.log_score != b.log_score) return a.log_score > b.log_score;
              return a.phrase_id < b.phrase_id;
            });
  for (std::size_t i = 0; i < candidates->size(); ++i)
    (*candidates)[i].rank = static_cast<int>(i) + 1;
}

RankedList RankCandidates(const ObservationMatrix &query,
                          const MatchingNetwork &network,
                          const PhonemeInventory &inventory,
                          const MatchParams &params) {
  if (network.Empty()) throw ValidationError("matching network is empty");
  CheckQuery(query, inventory);
  QueryPaths qp = InstantiateForQuery(network, query.DurationSeconds(),
                                      params.gamma, query.HopSeconds(),
                                      inventory,
                                      params.mode == DecodeMode::kHsmm);
  if (qp.paths.empty())
    throw ValidationError("no candidate path is decodable for a query of " +
                          std::to_string(query.NumFrames()) + " frames");
  RankedList list;
  list.excluded = std::move(qp.excluded);
  list.candidates.resize(qp.paths.size());
  ParallelFor(qp.paths.size(), params.num_threads, [&](std::size_t i) {
    const DecodablePath &path = qp.paths[i];
    DecodeOutcome outcome = DecodeWith(params.mode, query, path);
    RankedCandidate &c = list.candidates[i];
    c.phrase_id = path.phrase_id;
    c.log_score = params.mode == DecodeMode::kHmmPost
                      ? PostProcessorRescore(outcome, path, params.alpha)
                      : outcome.log_posterior;
    c.occupancies = std::move(outcome.occupancies);
  });
  AssignRanks(&list.candidates);
  return list;
}

int RankOf(const RankedList &list, std::string_view phrase_id) {
  for (const auto &c : list.candidates)
    if (c.phrase_id == phrase_id) return c.rank;
  return static_cast<int>(list.candidates.size()) + 1;
}

double Mrr(std::span<const int> ranks) {
  if (ranks.empty()) throw ValidationError("MRR of no queries");
  double sum = 0.0;
  for (int r : ranks) {
    if (r < 1) throw ValidationError("ranks must be >= 1");
    sum += 1.0 / r;
  }
  return sum / static_cast<double>(ranks.size());
}

double TopMHit(std::span<const int> ranks, int m) {
  if (ranks.empty()) throw ValidationError("Top-M hit of no queries");
  if (m < 1) throw ValidationError("M must be >= 1");
  std::size_t hits = 0;
  for (int r : ranks) {
    if (r < 1) throw ValidationError("ranks must be >= 1");
    if (r <= m) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<int> MatchReport::Ranks() const {
  std::vector<int> ranks;
  ranks.reserve(queries.size());
  for (const auto &q : queries) ranks.push_back(q.ground_truth_rank);
  return ranks;
}

void MatchReport::WriteRecords(std::ostream &os,
                               std::size_t max_candidates) const {
  using nlohmann::json;
  auto score = [](double v) -> json {
    return std::isfinite(v) ? json(v) : json(nullptr);
  };
  for (const auto &q : queries) {
    json rec;
    rec["query_id"] = q.query_id;
    rec["ground_truth"] = q.ground_truth;
    rec["rank"] = q.ground_truth_rank;
    json cands = json::array();
    std::size_t limit = max_candidates == 0 ? q.ranking.candidates.size()
                                            : max_candidates;
    for (std::size_t i = 0; i < q.ranking.candidates.size() && i < limit;
         ++i) {
      const auto &c = q.ranking.candidates[i];
      cands.push_back({{"phrase_id", c.phrase_id},
                       {"score", score(c.log_score)},
                       {"rank", c.rank}});
    }
    rec["candidates"] = std::move(cands);
    json excluded = json::array();
    for (const auto &e : q.ranking.excluded)
      excluded.push_back({{"phrase_id", e.phrase_id}, {"reason", e.reason}});
    rec["excluded"] = std::move(excluded);
    os << rec.dump() << '\n';
  }
  json summary;
  summary["queries"] = queries.size();
  summary["mrr"] = mrr;
  json hits = json::object();
  for (std::size_t i = 0; i < top_m.size(); ++i)
    hits[std::to_string(top_m[i])] = top_m_hit[i];
  summary["top_m_hit"] = std::move(hits);
  os << json{{"summary", summary}}.dump() << '\n';
}

void MatchReport::WriteSummary(std::ostream &os) const {
  std::size_t excluded = 0;
  for (const auto &q : queries) excluded += q.ranking.excluded.size();
  os << "queries: " << queries.size() << '\n';
  os << std::fixed << std::setprecision(4) << "MRR: " << mrr << '\n';
  for (std::size_t i = 0; i < top_m.size(); ++i)
    os << "Top-" << top_m[i] << " hit: " << top_m_hit[i] << '\n';
  os << "excluded (query, path) pairs: " << excluded << '\n';
  os.unsetf(std::ios::floatfield);
}

MatchReport RunMatch(std::span<const LabeledQuery> queries,
                     const MatchingNetwork &network,
                     const PhonemeInventory &inventory,
                     const MatchParams &params, std::vector<int> top_m) {
  if (queries.empty()) throw ValidationError("no queries to match");
  MatchReport report;
  for (const auto &q : queries) {
    if (network.Find(q.ground_truth) == network.K())
      throw ValidationError("ground truth '" + q.ground_truth + "' of query '" +
                            q.query_id + "' is not in the network");
    QueryResult r;
    r.query_id = q.query_id;
    r.ground_truth = q.ground_truth;
    try {
      r.ranking = RankCandidates(q.obs, network, inventory, params);
    } catch (const ValidationError &e) {
      throw ValidationError("query '" + q.query_id + "': " + e.what());
    }
    r.ground_truth_rank = RankOf(r.ranking, q.ground_truth);
    report.queries.push_back(std::move(r));
  }
  std::sort(top_m.begin(), top_m.end());
  top_m.erase(std::unique(top_m.begin(), top_m.end()), top_m.end());
  auto ranks = report.Ranks();
  report.mrr = Mrr(ranks);
  report.top_m = std::move(top_m);
  for (int m : report.top_m) report.top_m_hit.push_back(TopMHit(ranks, m));
  return report;
}

std::vector<double> DefaultAlphaGrid() {
  std::vector<double> grid;
  for (int k = 1; k <= 8; ++k) grid.push_back(0.25 * k);
  return grid;
}

std::vector<double> DefaultGammaGrid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 10.0);
  return grid;
}

namespace {

// Rank of `truth` among scored candidates, with the AssignRanks tie-break.
int RankFromScores(const std::vector<std::pair<std::string, double>> &scored,
                   const std::string &truth) {
  double truth_score = 0.0;
  bool found = false;
  for (const auto &[id, s] : scored)
    if (id == truth) {
      truth_score = s;
      found = true;
    }
  if (!found) return static_cast<int>(scored.size()) + 1;
  int rank = 1;
  for (const auto &[id, s] : scored)
    if (s > truth_score || (s == truth_score && id < truth)) ++rank;
  return rank;
}

}  // namespace

GridSearchResult GridSearch(std::span<const LabeledQuery> dev,
                            const MatchingNetwork &network,
                            const PhonemeInventory &inventory, DecodeMode mode,
                            std::span<const double> alpha_grid,
                            std::span<const double> gamma_grid,
                            unsigned num_threads) {
  if (dev.empty()) throw ValidationError("grid search needs dev queries");
  if (alpha_grid.empty() || gamma_grid.empty())
    throw ValidationError("grid search needs non-empty grids");
  std::vector<double> alphas(alpha_grid.begin(), alpha_grid.end());
  std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
  std::sort(alphas.begin(), alphas.end());
  std::sort(gammas.begin(), gammas.end());
  for (double a : alphas)
    if (!(a >= 0.0)) throw ValidationError("alpha grid values must be >= 0");
  for (double g : gammas)
    if (!(g > 0.0)) throw ValidationError("gamma grid values must be > 0");

  std::vector<RoleType> roles;
  for (const auto &q : dev) {
    std::size_t k = network.Find(q.ground_truth);
    if (k == network.K())
      throw ValidationError("ground truth '" + q.ground_truth +
                            "' of dev query '" + q.query_id +
                            "' is not in the network");
    roles.push_back(network.Path(k).role);
    CheckQuery(q.obs, inventory);
  }

  // ranks[a][g][q]
  std::vector<std::vector<std::vector<int>>> ranks(
      alphas.size(),
      std::vector<std::vector<int>>(gammas.size(),
                                    std::vector<int>(dev.size(), 0)));
  auto fill_all_alphas = [&](std::size_t g, std::size_t q, int rank) {
    for (std::size_t a = 0; a < alphas.size(); ++a) ranks[a][g][q] = rank;
  };

  if (mode == DecodeMode::kHsmm || mode == DecodeMode::kHmm) {
    // Neither mode uses alpha; the HMM does not use gamma either.
    const std::size_t num_gammas = mode == DecodeMode::kHmm ? 1 : gammas.size();
    for (std::size_t g = 0; g < num_gammas; ++g) {
      MatchParams params{mode, gammas[g], 0.0, num_threads};
      for (std::size_t q = 0; q < dev.size(); ++q) {
        int rank = RankOf(RankCandidates(dev[q].obs, network, inventory, params),
                          dev[q].ground_truth);
        if (mode == DecodeMode::kHmm)
          for (std::size_t gg = 0; gg < gammas.size(); ++gg)
            fill_all_alphas(gg, q, rank);
        else
          fill_all_alphas(g, q, rank);
      }
    }
  } else {
    // The HMM decode is independent of alpha and gamma, so decode once per
    // query and rescore at every grid point.
    for (std::size_t q = 0; q < dev.size(); ++q) {
      const auto &obs = dev[q].obs;
      QueryPaths base = InstantiateForQuery(network, obs.DurationSeconds(),
                                            gammas[0], obs.HopSeconds(),
                                            inventory, false);
      if (base.paths.empty())
        throw ValidationError("dev query '" + dev[q].query_id +
                              "' has no decodable path");
      std::vector<DecodeOutcome> outcomes(base.paths.size());
      ParallelFor(base.paths.size(), num_threads, [&](std::size_t i) {
        outcomes[i] = HmmViterbi(obs, base.paths[i]);
      });
      std::unordered_map<std::string, std::size_t> outcome_index;
      for (std::size_t i = 0; i < outcomes.size(); ++i)
        outcome_index[outcomes[i].phrase_id] = i;
      for (std::size_t g = 0; g < gammas.size(); ++g) {
        QueryPaths at_gamma = InstantiateForQuery(
            network, obs.DurationSeconds(), gammas[g], obs.HopSeconds(),
            inventory, false);
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          std::vector<std::pair<std::string, double>> scored;
          for (const auto &path : at_gamma.paths) {
            auto it = outcome_index.find(path.phrase_id);
            if (it == outcome_index.end()) continue;
            scored.emplace_back(path.phrase_id,
                                PostProcessorRescore(outcomes[it->second],
                                                     path, alphas[a]));
          }
          ranks[a][g][q] = RankFromScores(scored, dev[q].ground_truth);
        }
      }
    }
  }

  GridSearchResult result;
  result.mode = mode;
  std::map<RoleType, bool> have_best;
  bool have_overall = false;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      GridPoint point;
      point.alpha = alphas[a];
      point.gamma = gammas[g];
      point.mrr = Mrr(ranks[a][g]);
      std::map<RoleType, std::vector<int>> by_role;
      for (std::size_t q = 0; q < dev.size(); ++q)
        by_role[roles[q]].push_back(ranks[a][g][q]);
      for (const auto &[role, r] : by_role) point.mrr_by_role[role] = Mrr(r);
      // Strict improvement keeps the smallest alpha, then gamma, on ties.
      if (!have_overall || point.mrr > result.best.mrr) {
        result.best = point;
        have_overall = true;
      }
      for (const auto &[role, m] : point.mrr_by_role) {
        if (!have_best[role] || m > result.best_by_role[role].mrr_by_role[role]) {
          result.best_by_role[role] = point;
          have_best[role] = true;
        }
      }
      result.points.push_back(std::move(point));
    }
  }
  return result;
}

void GridSearchResult::Write(std::ostream &os) const {
  os << "# mode " << DecodeModeName(mode) << '\n';
  os << "# alpha\tgamma\tmrr\tmrr_dan\tmrr_laosheng\n";
  auto role_mrr = [](const GridPoint &p, RoleType r) {
    auto it = p.mrr_by_role.find(r);
    return it == p.mrr_by_role.end() ? std::string("-")
                                     : FormatDoubleShortest(it->second);
  };
  for (const auto &p : points)
    os << FormatDoubleShortest(p.alpha) << '\t' << FormatDoubleShortest(p.gamma)
       << '\t' << FormatDoubleShortest(p.mrr) << '\t'
       << role_mrr(p, RoleType::kDan) << '\t'
       << role_mrr(p, RoleType::kLaosheng) << '\n';
  os << "# best\talpha=" << FormatDoubleShortest(best.alpha)
     << "\tgamma=" << FormatDoubleShortest(best.gamma)
     << "\tmrr=" << FormatDoubleShortest(best.mrr) << '\n';
  for (const auto &[role, p] : best_by_role)
    os << "# best_" << RoleTypeName(role)
       << "\talpha=" << FormatDoubleShortest(p.alpha)
       << "\tgamma=" << FormatDoubleShortest(p.gamma)
       << "\tmrr=" << FormatDoubleShortest(p.mrr_by_role.at(role)) << '\n';
}

std::vector<LabeledQuery> LoadQuerySet(const std::filesystem::path &manifest) {
  const auto base = manifest.parent_path();
  std::vector<LabeledQuery> queries;
  for (const TextLine &line : ReadContentLines(manifest)) {
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      throw ParseError(Where(manifest.string(), line.number) +
                       "expected query_id<TAB>obs_file<TAB>ground_truth");
    std::filesystem::path file = fields[1];
    if (file.is_relative()) file = base / file;
    queries.push_back({fields[0], ObservationMatrix::Load(file), fields[2]});
  }
  return queries;
}

void WriteQuerySet(const std::filesystem::path &dir,
                   std::span<const LabeledQuery> queries) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "queries.tsv");
  if (!manifest) throw Error("cannot write " + (dir / "queries.tsv").string());
  for (const auto &q : queries) {
    const std::string name = q.query_id + ".obs";
    std::ofstream os(dir / name);
    if (!os) throw Error("cannot write " + (dir / name).string());
    q.obs.Write(os);
    manifest << q.query_id << '\t' << name << '\t' << q.ground_truth << '\n';
  }
}

MatchingNetwork MakeSyntheticNetwork(const PhonemeInventory &inventory,
                                     const SyntheticNetworkOptions &opts) {
  if (opts.num_paths < 1 || opts.min_states < 1 ||
      opts.max_states < opts.min_states)
    throw ValidationError("bad synthetic network size options");
  if (!(opts.min_mu_s > 0.0) || opts.max_mu_s < opts.min_mu_s)
    throw ValidationError("bad synthetic duration range");
  std::mt19937_64 rng(opts.seed);
  const double log_lo = std::log(opts.min_mu_s);
  const double log_hi = std::log(opts.max_mu_s);
  std::vector<LyricPath> paths;
  for (std::size_t k = 0; k < opts.num_paths; ++k) {
    LyricPath path;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%04zu", k);
    path.phrase_id = id;
    path.role = k % 2 == 0 ? RoleType::kDan : RoleType::kLaosheng;
    std::size_t n = UniformIndex(rng, opts.min_states, opts.max_states);
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t p = UniformIndex(rng, 0, inventory.Size() - 1);
      double mu = std::exp(log_lo + (log_hi - log_lo) * Uniform01(rng));
      path.states.push_back({inventory.Label(p), mu});
    }
    paths.push_back(std::move(path));
  }
  return MatchingNetwork(std::move(paths));
}

std::vector<LabeledQuery> MakeSyntheticQueries(
    const MatchingNetwork &network, const PhonemeInventory &inventory,
    const SyntheticQueryOptions &opts) {
  if (network.Empty()) throw ValidationError("matching network is empty");
  if (!(opts.tempo_spread >= 1.0))
    throw ValidationError("tempo_spread must be >= 1");
  std::mt19937_64 rng(opts.seed);
  const double log_spread = std::log(opts.tempo_spread);
  std::vector<LabeledQuery> queries;
  for (std::size_t i = 0; i < opts.num_queries; ++i) {
    const LyricPath &path =
        network.Path(UniformIndex(rng, 0, network.K() - 1));
    double tempo = std::exp(log_spread * (2.0 * Uniform01(rng) - 1.0));
    DecodablePath dp = InstantiatePath(path, path.TotalSeconds() * tempo,
                                       opts.gamma, opts.hop_s, inventory);
    SynthOptions synth{opts.noise_temp, rng(), false};
    SynthQuery sq = SynthesizeQuery(dp, inventory.Size(), synth);
    char id[32];
    std::snprintf(id, sizeof(id), "q%04zu", i);
    queries.push_back({id, std::move(sq.obs), path.phrase_id});
  }
  return queries;
}

}  // namespace scorematch
