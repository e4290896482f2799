// src/matching-network.cc

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

#include "scorematch/matching-network.h"

#include <cmath>
#include <fstream>
#include <set>

#include "scorematch/text-io.h"

namespace scorematch {

double LyricPath::TotalSeconds() const {
  double total = 0.0;
  for (const auto &s : states) total += s.mu_s;
  return total;
}

MatchingNetwork::MatchingNetwork(std::vector<LyricPath> paths)
    : paths_(std::move(paths)) {
  std::set<std::string, std::less<>> seen;
  for (const auto &path : paths_) {
    if (path.phrase_id.empty())
      throw ValidationError("lyric path with empty phrase_id");
    if (!seen.insert(path.phrase_id).second)
      throw ValidationError("duplicate phrase_id '" + path.phrase_id +
                            "' in network");
    if (path.states.empty())
      throw ValidationError("lyric path '" + path.phrase_id +
                            "' has no states");
    for (const auto &s : path.states)
      if (!(s.mu_s > 0.0) || !std::isfinite(s.mu_s))
        throw ValidationError("lyric path '" + path.phrase_id +
                              "' has a non-positive state duration");
  }
}

std::size_t MatchingNetwork::Find(std::string_view phrase_id) const {
  for (std::size_t k = 0; k < paths_.size(); ++k)
    if (paths_[k].phrase_id == phrase_id) return k;
  return paths_.size();
}

MatchingNetwork MatchingNetwork::Read(std::istream &is,
                                      std::string_view source) {
  std::vector<LyricPath> paths;
  for (const TextLine &line : ReadContentLines(is)) {
    const std::string where = Where(source, line.number);
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 3)
      throw ParseError(where + "expected 3 tab-separated fields");
    LyricPath path;
    path.phrase_id = fields[0];
    try {
      path.role = ParseRoleType(fields[1]);
    } catch (const ValidationError &e) {
      throw ValidationError(where + e.what());
    }
    auto tokens = SplitOnWhitespace(fields[2]);
    if (tokens.empty() || tokens.size() % 2 != 0)
      throw ParseError(where + "states must be (phoneme, mu_s) pairs");
    for (std::size_t i = 0; i < tokens.size(); i += 2) {
      try {
        path.states.push_back({tokens[i], ParseDouble(tokens[i + 1], "mu_s")});
      } catch (const ParseError &e) {
        throw ParseError(where + e.what());
      }
    }
    paths.push_back(std::move(path));
  }
  try {
    return MatchingNetwork(std::move(paths));
  } catch (const ValidationError &e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

MatchingNetwork MatchingNetwork::Load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return Read(is, path.string());
}

void MatchingNetwork::Write(std::ostream &os) const {
  for (const auto &path : paths_) {
    os << path.phrase_id << '\t' << RoleTypeName(path.role) << '\t';
    for (std::size_t i = 0; i < path.states.size(); ++i) {
      if (i > 0) os << ' ';
      os << path.states[i].phoneme << ' '
         << FormatDoubleShortest(path.states[i].mu_s);
    }
    os << '\n';
  }
}

MatchingNetwork BuildNetwork(std::span<const ScorePhrase> phrases,
                             const PronunciationDictionary &dict,
                             const DurationStats &stats,
                             double seconds_per_unit) {
  if (phrases.empty())
    throw ValidationError("cannot build a matching network from no phrases");
  if (!(seconds_per_unit > 0.0))
    throw ValidationError("seconds_per_unit must be positive");
  std::vector<LyricPath> paths;
  paths.reserve(phrases.size());
  for (const auto &phrase : phrases) {
    LyricPath path;
    path.phrase_id = phrase.phrase_id;
    path.role = phrase.role;
    try {
      for (const auto &syl : phrase.syllables) {
        const auto &phones = dict.Lookup(syl.pinyin);
        auto durs = SplitSyllableDuration(syl.duration_units * seconds_per_unit,
                                          phones, stats);
        for (std::size_t i = 0; i < phones.size(); ++i)
          path.states.push_back({phones[i], durs[i]});
      }
    } catch (const ValidationError &e) {
      throw ValidationError("phrase " + phrase.phrase_id + ": " + e.what());
    }
    paths.push_back(std::move(path));
  }
  return MatchingNetwork(std::move(paths));
}

int FramesForDuration(double duration_s, double hop_s) {
  return static_cast<int>(std::llround(duration_s / hop_s));
}

DecodablePath InstantiatePath(const LyricPath &path, double query_dur_s,
                              double gamma, double hop_s,
                              const PhonemeInventory &inventory) {
  std::vector<double> mus;
  mus.reserve(path.states.size());
  for (const auto &s : path.states) mus.push_back(s.mu_s);
  auto normalized = NormalizePathDurations(mus, query_dur_s);
  DecodablePath out;
  out.phrase_id = path.phrase_id;
  out.states.reserve(path.states.size());
  for (std::size_t j = 0; j < path.states.size(); ++j)
    out.states.push_back(
        {inventory.IndexOf(path.states[j].phoneme),
         StateDurationDist::Discretize(normalized[j], gamma, hop_s)});
  return out;
}

QueryPaths InstantiateForQuery(const MatchingNetwork &network,
                               double query_dur_s, double gamma, double hop_s,
                               const PhonemeInventory &inventory,
                               bool require_support) {
  if (!(query_dur_s > 0.0))
    throw ValidationError("query duration must be positive");
  if (!(hop_s > 0.0)) throw ValidationError("hop must be positive");
  const int num_frames = FramesForDuration(query_dur_s, hop_s);
  QueryPaths out;
  out.paths.reserve(network.K());
  for (const auto &path : network.Paths()) {
    if (static_cast<long long>(path.states.size()) > num_frames) {
      out.excluded.push_back(
          {path.phrase_id, std::to_string(path.states.size()) +
                               " states exceed " + std::to_string(num_frames) +
                               " query frames"});
      continue;
    }
    DecodablePath dp;
    try {
      dp = InstantiatePath(path, query_dur_s, gamma, hop_s, inventory);
    } catch (const ValidationError &e) {
      throw ValidationError("phrase " + path.phrase_id + ": " + e.what());
    }
    long long support = 0;
    for (const auto &s : dp.states) support += s.duration.MaxFrames();
    if (require_support && support < num_frames) {
      out.excluded.push_back(
          {path.phrase_id, "duration support of " + std::to_string(support) +
                               " frames cannot cover " +
                               std::to_string(num_frames) + " query frames"});
      continue;
    }
    out.paths.push_back(std::move(dp));
  }
  return out;
}

}  // namespace scorematch
