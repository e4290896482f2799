// src/decoder.cc

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

#include "scorematch/decoder.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <limits>

#include "scorematch/text-io.h"

namespace scorematch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Two scores closer than this are a tie. Only affects which of several
// equally good segmentations is reported.
double TieSlack(double score) {
  return std::isfinite(score) ? 1e-12 * std::max(1.0, std::abs(score)) : 0.0;
}

void CheckDecodable(const ObservationMatrix &obs, const DecodablePath &path) {
  if (path.states.empty())
    throw ValidationError("path '" + path.phrase_id + "' has no states");
  if (path.NumStates() > obs.NumFrames())
    throw ValidationError("path '" + path.phrase_id + "' has " +
                          std::to_string(path.NumStates()) +
                          " states but the query has only " +
                          std::to_string(obs.NumFrames()) + " frames");
  for (const auto &s : path.states)
    if (s.phoneme_index >= obs.NumClasses())
      throw ValidationError("path '" + path.phrase_id +
                            "' refers to a phoneme class outside the "
                            "observation matrix");
}

}  // namespace

ObservationMatrix::ObservationMatrix(std::size_t num_frames,
                                     std::size_t num_classes,
                                     std::vector<double> log_probs,
                                     double hop_s)
    : num_frames_(num_frames),
      num_classes_(num_classes),
      log_probs_(std::move(log_probs)),
      hop_s_(hop_s) {
  if (num_frames_ < 1 || num_classes_ < 1)
    throw ValidationError("observation matrix needs T >= 1 and P >= 1");
  if (log_probs_.size() != num_frames_ * num_classes_)
    throw ValidationError("observation matrix data has wrong size");
  if (!(hop_s_ > 0.0) || !std::isfinite(hop_s_))
    throw ValidationError("observation hop must be positive");
  for (double v : log_probs_)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw ValidationError("observation log-probabilities must not be NaN "
                            "or +inf");
}

bool ObservationMatrix::RowsNormalized(double tol) const {
  for (std::size_t t = 0; t < num_frames_; ++t) {
    double sum = 0.0;
    for (double v : Row(t)) sum += std::exp(v);
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

ObservationMatrix ObservationMatrix::Shifted(double c) const {
  std::vector<double> data = log_probs_;
  for (double &v : data) v += c;
  return ObservationMatrix(num_frames_, num_classes_, std::move(data), hop_s_);
}

ObservationMatrix ObservationMatrix::Read(std::istream &is,
                                          std::string_view source) {
  auto lines = ReadContentLines(is);
  if (lines.empty()) throw ParseError(std::string(source) + ": empty file");
  auto header = SplitOnWhitespace(lines[0].text);
  if (header.size() != 3)
    throw ParseError(Where(source, lines[0].number) +
                     "expected header 'T P hop_s'");
  long long num_frames, num_classes;
  double hop_s;
  try {
    num_frames = ParseInt(header[0], "T");
    num_classes = ParseInt(header[1], "P");
    hop_s = ParseDouble(header[2], "hop_s");
  } catch (const ParseError &e) {
    throw ParseError(Where(source, lines[0].number) + e.what());
  }
  if (num_frames < 1 || num_classes < 1)
    throw ValidationError(Where(source, lines[0].number) +
                          "T and P must be >= 1");
  if (static_cast<long long>(lines.size()) - 1 != num_frames)
    throw ParseError(std::string(source) + ": header says " +
                     std::to_string(num_frames) + " frames, found " +
                     std::to_string(lines.size() - 1));
  std::vector<double> data;
  data.reserve(num_frames * num_classes);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = SplitOnWhitespace(lines[i].text);
    if (static_cast<long long>(fields.size()) != num_classes)
      throw ParseError(Where(source, lines[i].number) + "expected " +
                       std::to_string(num_classes) + " values");
    for (const auto &f : fields) {
      try {
        data.push_back(ParseDouble(f, "log-probability"));
      } catch (const ParseError &e) {
        throw ParseError(Where(source, lines[i].number) + e.what());
      }
    }
  }
  try {
    return ObservationMatrix(num_frames, num_classes, std::move(data), hop_s);
  } catch (const ValidationError &e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

ObservationMatrix ObservationMatrix::Load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return Read(is, path.string());
}

void ObservationMatrix::Write(std::ostream &os) const {
  os << num_frames_ << ' ' << num_classes_ << ' ' << FormatDouble17(hop_s_)
     << '\n';
  for (std::size_t t = 0; t < num_frames_; ++t) {
    auto row = Row(t);
    for (std::size_t p = 0; p < num_classes_; ++p)
      os << (p ? " " : "") << FormatDouble17(row[p]);
    os << '\n';
  }
}

DecodeOutcome HsmmViterbi(const ObservationMatrix &obs,
                          const DecodablePath &path) {
  CheckDecodable(obs, path);
  const int num_frames = static_cast<int>(obs.NumFrames());
  const int num_states = static_cast<int>(path.NumStates());
  const int stride = num_frames + 1;

  // best[j * stride + s]: best score of states j..N-1 covering frames
  // s..T-1 when state j is entered at frame s. Computed backwards so that
  // the forward read-out can pick the smallest optimal occupancy first.
  std::vector<double> best((num_states + 1) * stride, kNegInf);
  std::vector<char> reachable((num_states + 1) * stride, 0);
  best[num_states * stride + num_frames] = 0.0;
  reachable[num_states * stride + num_frames] = 1;

  auto max_occupancy = [&](int j, int s) {
    // Leave at least one frame for every later state.
    int room = num_frames - s - (num_states - j - 1);
    return std::min(path.states[j].duration.MaxFrames(), room);
  };

  for (int j = num_states - 1; j >= 0; --j) {
    const auto &state = path.states[j];
    const std::size_t ph = state.phoneme_index;
    const int first_start = j;
    const int last_start = num_frames - (num_states - j);
    for (int s = first_start; s <= last_start; ++s) {
      double seg = 0.0, top = kNegInf;
      bool any = false;
      const int max_u = max_occupancy(j, s);
      for (int u = 1; u <= max_u; ++u) {
        seg += obs(s + u - 1, ph);
        const int next = (j + 1) * stride + s + u;
        if (!reachable[next]) continue;
        double cand = state.duration.LogPmf(u) + seg + best[next];
        if (!any || cand > top) top = cand;
        any = true;
      }
      best[j * stride + s] = top;
      reachable[j * stride + s] = any;
    }
  }

#ifndef NDEBUG
  // A segment score can never beat the per-frame maxima it covers.
  {
    std::vector<double> bound(num_frames + 1, 0.0);
    for (int t = num_frames - 1; t >= 0; --t) {
      auto row = obs.Row(t);
      bound[t] = bound[t + 1] + *std::max_element(row.begin(), row.end());
    }
    for (int j = 0; j < num_states; ++j)
      for (int s = 0; s <= num_frames; ++s)
        if (reachable[j * stride + s])
          assert(best[j * stride + s] <=
                 bound[s] + 1e-9 * std::max(1.0, std::abs(bound[s])));
  }
#endif

  if (!reachable[0])
    throw ValidationError("path '" + path.phrase_id +
                          "': no segmentation of " +
                          std::to_string(num_frames) +
                          " frames fits the state duration supports");

  DecodeOutcome outcome;
  outcome.phrase_id = path.phrase_id;
  outcome.log_posterior = best[0];
  outcome.feasible = best[0] != kNegInf;
  outcome.occupancies.reserve(num_states);
  int s = 0;
  for (int j = 0; j < num_states; ++j) {
    const auto &state = path.states[j];
    // With no finite segmentation every structurally valid step ties.
    const double target = outcome.feasible ? best[j * stride + s] : kNegInf;
    const double slack = TieSlack(target);
    double seg = 0.0;
    int chosen = 0;
    const int max_u = max_occupancy(j, s);
    for (int u = 1; u <= max_u; ++u) {
      seg += obs(s + u - 1, state.phoneme_index);
      const int next = (j + 1) * stride + s + u;
      if (!reachable[next]) continue;
      double cand = state.duration.LogPmf(u) + seg + best[next];
      if (cand >= target - slack) {
        chosen = u;
        break;
      }
    }
    assert(chosen > 0);
    outcome.occupancies.push_back(chosen);
    s += chosen;
  }
  return outcome;
}

double HmmSelfTransition(double mu_s, double hop_s) {
  if (!(mu_s > 0.0) || !(hop_s > 0.0))
    throw ValidationError("self-transition needs mu and hop > 0");
  return std::max(0.0, 1.0 - hop_s / mu_s);
}

DecodeOutcome HmmViterbi(const ObservationMatrix &obs,
                         const DecodablePath &path) {
  CheckDecodable(obs, path);
  const int num_frames = static_cast<int>(obs.NumFrames());
  const int num_states = static_cast<int>(path.NumStates());
  const double hop_s = obs.HopSeconds();

  std::vector<double> log_stay(num_states), log_leave(num_states);
  for (int j = 0; j < num_states; ++j) {
    double p = HmmSelfTransition(path.states[j].duration.MuSeconds(), hop_s);
    log_stay[j] = p > 0.0 ? std::log(p) : kNegInf;
    log_leave[j] = std::log1p(-p);
  }

  // beta[t * N + j]: best score of frames t..T-1 given state j at frame t,
  // including the exit transition after frame T-1. A cell is reachable when
  // state j can be occupied at t and still finish the chain by T-1.
  auto reachable = [&](int t, int j) {
    return j <= t && (num_states - 1 - j) <= (num_frames - 1 - t);
  };
  std::vector<double> beta(static_cast<std::size_t>(num_frames) * num_states,
                           kNegInf);
  auto at = [&](int t, int j) -> double & {
    return beta[static_cast<std::size_t>(t) * num_states + j];
  };
  at(num_frames - 1, num_states - 1) =
      obs(num_frames - 1, path.states[num_states - 1].phoneme_index) +
      log_leave[num_states - 1];
  for (int t = num_frames - 2; t >= 0; --t) {
    for (int j = 0; j < num_states; ++j) {
      if (!reachable(t, j)) continue;
      double top = kNegInf;
      if (reachable(t + 1, j)) top = log_stay[j] + at(t + 1, j);
      if (j + 1 < num_states && reachable(t + 1, j + 1))
        top = std::max(top, log_leave[j] + at(t + 1, j + 1));
      at(t, j) = obs(t, path.states[j].phoneme_index) + top;
    }
  }

  DecodeOutcome outcome;
  outcome.phrase_id = path.phrase_id;
  outcome.log_posterior = at(0, 0);
  outcome.feasible = outcome.log_posterior != kNegInf;
  outcome.occupancies.assign(num_states, 0);
  int j = 0;
  outcome.occupancies[0] = 1;
  for (int t = 0; t + 1 < num_frames; ++t) {
    bool can_stay = reachable(t + 1, j);
    bool can_leave = j + 1 < num_states && reachable(t + 1, j + 1);
    double stay = can_stay ? log_stay[j] + at(t + 1, j) : kNegInf;
    double leave = can_leave ? log_leave[j] + at(t + 1, j + 1) : kNegInf;
    // Leaving early keeps earlier occupancies small on ties.
    if (can_leave &&
        (!can_stay || !outcome.feasible || leave >= stay - TieSlack(stay)))
      ++j;
    ++outcome.occupancies[j];
  }
  assert(j == num_states - 1);
  return outcome;
}

double PostProcessorRescore(const DecodeOutcome &outcome,
                            const DecodablePath &path, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw ValidationError("post-processor weight alpha must be >= 0");
  if (outcome.occupancies.size() != path.NumStates())
    throw ValidationError("outcome for '" + outcome.phrase_id +
                          "' does not match path '" + path.phrase_id + "'");
  if (alpha == 0.0) return outcome.log_posterior;
  double duration_term = 0.0;
  for (std::size_t j = 0; j < path.NumStates(); ++j) {
    const auto &d = path.states[j].duration;
    duration_term += LogGaussianDurationDensity(
        outcome.occupancies[j] * d.HopSeconds(), d.MuSeconds(), d.Gamma());
  }
  return outcome.log_posterior + alpha * duration_term;
}

std::uint64_t CountSegmentations(int num_frames,
                                 std::span<const int> max_frames,
                                 std::uint64_t cap) {
  if (num_frames < 0) return 0;
  // ways[s]: compositions of s frames into the states seen so far.
  std::vector<std::uint64_t> ways(num_frames + 1, 0);
  ways[0] = 1;
  for (int m : max_frames) {
    std::vector<std::uint64_t> next(num_frames + 1, 0);
    for (int s = 0; s <= num_frames; ++s) {
      if (ways[s] == 0) continue;
      for (int u = 1; u <= m && s + u <= num_frames; ++u) {
        std::uint64_t v = next[s + u] + ways[s];
        next[s + u] = (v < ways[s] || v > cap) ? cap : v;
      }
    }
    ways.swap(next);
  }
  return std::min(ways[num_frames], cap);
}

double ScoreSegmentation(const ObservationMatrix &obs,
                         const DecodablePath &path,
                         std::span<const int> occupancies) {
  if (occupancies.size() != path.NumStates())
    throw ValidationError("segmentation length does not match the path");
  double score = 0.0;
  std::size_t t = 0;
  for (std::size_t j = 0; j < occupancies.size(); ++j) {
    score += path.states[j].duration.LogPmf(occupancies[j]);
    for (int k = 0; k < occupancies[j]; ++k, ++t)
      score += obs(t, path.states[j].phoneme_index);
  }
  if (t != obs.NumFrames())
    throw ValidationError("segmentation does not cover every frame");
  return score;
}

namespace {

// Calls visit(occupancies) for every composition, in lexicographic order.
template <typename Visit>
void EnumerateSegmentations(int remaining, std::size_t j,
                            std::span<const int> max_frames,
                            std::vector<int> *occ, Visit &visit) {
  const std::size_t n = max_frames.size();
  if (j + 1 == n) {
    if (remaining >= 1 && remaining <= max_frames[j]) {
      (*occ)[j] = remaining;
      visit(*occ);
    }
    return;
  }
  const int later = static_cast<int>(n - j - 1);
  for (int u = 1; u <= max_frames[j] && u <= remaining - later; ++u) {
    (*occ)[j] = u;
    EnumerateSegmentations(remaining - u, j + 1, max_frames, occ, visit);
  }
}

}  // namespace

DecodeOutcome BruteForceDecode(const ObservationMatrix &obs,
                               const DecodablePath &path,
                               std::uint64_t budget,
                               std::uint64_t *num_enumerated) {
  CheckDecodable(obs, path);
  const int num_frames = static_cast<int>(obs.NumFrames());
  std::vector<int> max_frames;
  for (const auto &s : path.states)
    max_frames.push_back(s.duration.MaxFrames());
  const std::uint64_t total =
      CountSegmentations(num_frames, max_frames, budget + 1);
  if (total > budget)
    throw ValidationError("brute-force decode of '" + path.phrase_id +
                          "' exceeds the enumeration budget");
  if (total == 0)
    throw ValidationError("path '" + path.phrase_id +
                          "': no segmentation fits the duration supports");

  std::vector<int> occ(path.NumStates());
  std::uint64_t count = 0;
  double top = kNegInf;
  auto find_max = [&](const std::vector<int> &o) {
    ++count;
    top = std::max(top, ScoreSegmentation(obs, path, o));
  };
  EnumerateSegmentations(num_frames, 0, max_frames, &occ, find_max);

  // Second pass: the lexicographically first segmentation that attains it.
  DecodeOutcome outcome;
  outcome.phrase_id = path.phrase_id;
  outcome.log_posterior = top;
  outcome.feasible = top != kNegInf;
  const double slack = TieSlack(top);
  bool found = false;
  auto pick = [&](const std::vector<int> &o) {
    if (found) return;
    if (ScoreSegmentation(obs, path, o) >= top - slack) {
      outcome.occupancies = o;
      found = true;
    }
  };
  EnumerateSegmentations(num_frames, 0, max_frames, &occ, pick);
  if (num_enumerated != nullptr) *num_enumerated = count;
  return outcome;
}

}  // namespace scorematch
