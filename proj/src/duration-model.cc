// src/duration-model.cc

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

#include "scorematch/duration-model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "scorematch/text-io.h"

namespace scorematch {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double DurationStats::Centroid(std::string_view phoneme) const {
  auto it = centroids.find(phoneme);
  if (it == centroids.end())
    throw ValidationError("no duration centroid for phoneme '" +
                          std::string(phoneme) + "'");
  return it->second;
}

DurationStats DurationStats::Read(std::istream &is, std::string_view source) {
  DurationStats stats;
  for (const TextLine &line : ReadContentLines(is)) {
    const std::string where = Where(source, line.number);
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 3 || fields[0].empty())
      throw ParseError(where + "expected phoneme<TAB>centroid_s<TAB>count");
    double centroid;
    long long count;
    try {
      centroid = ParseDouble(fields[1], "centroid");
      count = ParseInt(fields[2], "count");
    } catch (const ParseError &e) {
      throw ParseError(where + e.what());
    }
    if (!(centroid > 0.0) || !std::isfinite(centroid) || count < 1)
      throw ValidationError(where + "centroid must be > 0 and count >= 1");
    if (!stats.centroids.emplace(fields[0], centroid).second)
      throw ValidationError(where + "duplicate phoneme '" + fields[0] + "'");
    stats.counts.emplace(fields[0], static_cast<std::size_t>(count));
  }
  return stats;
}

DurationStats DurationStats::Load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return Read(is, path.string());
}

void DurationStats::Write(std::ostream &os) const {
  for (const auto &[phoneme, centroid] : centroids)
    os << phoneme << '\t' << FormatDoubleShortest(centroid) << '\t'
       << counts.at(phoneme) << '\n';
}

DurationStats ComputeDurationStats(std::span<const AnnotationRecord> records) {
  if (records.empty())
    throw ValidationError("cannot compute duration stats from no annotations");
  std::map<std::string, double, std::less<>> sums;
  DurationStats stats;
  for (const auto &r : records) {
    if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s))
      throw ValidationError("annotation for '" + r.phoneme +
                            "' has non-positive duration");
    sums[r.phoneme] += r.duration_s;
    ++stats.counts[r.phoneme];
  }
  for (const auto &[phoneme, sum] : sums)
    stats.centroids[phoneme] =
        sum / static_cast<double>(stats.counts[phoneme]);
  return stats;
}

std::vector<double> SplitSyllableDuration(
    double syllable_dur_s, std::span<const std::string> phonemes,
    const DurationStats &stats) {
  if (!(syllable_dur_s > 0.0))
    throw ValidationError("syllable duration must be positive");
  if (phonemes.empty())
    throw ValidationError("syllable has no phonemes");
  std::vector<double> out;
  out.reserve(phonemes.size());
  double total = 0.0;
  for (const auto &p : phonemes) {
    out.push_back(stats.Centroid(p));
    total += out.back();
  }
  for (double &d : out) d = syllable_dur_s * d / total;
  return out;
}

std::vector<double> NormalizePathDurations(std::span<const double> durations_s,
                                           double query_dur_s) {
  if (durations_s.empty())
    throw ValidationError("cannot normalize an empty duration list");
  if (!(query_dur_s > 0.0))
    throw ValidationError("query duration must be positive");
  double total = 0.0;
  for (double d : durations_s) {
    if (!(d > 0.0)) throw ValidationError("durations must be positive");
    total += d;
  }
  std::vector<double> out(durations_s.begin(), durations_s.end());
  for (double &d : out) d = d * query_dur_s / total;
  return out;
}

StateDurationDist StateDurationDist::Discretize(double mu_s, double gamma,
                                                double hop_s) {
  if (!(mu_s > 0.0) || !(gamma > 0.0) || !(hop_s > 0.0) ||
      !std::isfinite(mu_s) || !std::isfinite(gamma) || !std::isfinite(hop_s))
    throw ValidationError("duration distribution needs mu, gamma, hop > 0");
  const double sigma = gamma * mu_s;
  // The small slack keeps M stable when (mu + 4 sigma) / hop lands on an
  // integer up to rounding noise.
  const double bound = std::ceil((mu_s + 4.0 * sigma) / hop_s - 1e-9);
  const int max_frames = static_cast<int>(std::max(1.0, bound));

  std::vector<double> log_density(max_frames);
  double peak = kNegInf;
  for (int u = 1; u <= max_frames; ++u) {
    double z = (u * hop_s - mu_s) / sigma;
    log_density[u - 1] = -0.5 * z * z;
    peak = std::max(peak, log_density[u - 1]);
  }
  double mass = 0.0;
  for (double v : log_density) mass += std::exp(v - peak);
  const double log_norm = peak + std::log(mass);

  StateDurationDist dist;
  dist.mu_s_ = mu_s;
  dist.gamma_ = gamma;
  dist.hop_s_ = hop_s;
  dist.log_pmf_.resize(max_frames);
  dist.pmf_.resize(max_frames);
  for (int i = 0; i < max_frames; ++i) {
    dist.log_pmf_[i] = log_density[i] - log_norm;
    dist.pmf_[i] = std::exp(dist.log_pmf_[i]);
  }
  return dist;
}

StateDurationDist StateDurationDist::FromPmf(std::vector<double> pmf,
                                             double mu_s, double gamma,
                                             double hop_s) {
  if (pmf.empty()) throw ValidationError("occupancy pmf must not be empty");
  if (!(mu_s > 0.0) || !(gamma > 0.0) || !(hop_s > 0.0))
    throw ValidationError("duration distribution needs mu, gamma, hop > 0");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("occupancy pmf entries must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ValidationError("occupancy pmf must sum to 1");
  StateDurationDist dist;
  dist.mu_s_ = mu_s;
  dist.gamma_ = gamma;
  dist.hop_s_ = hop_s;
  dist.log_pmf_.reserve(pmf.size());
  for (double p : pmf) dist.log_pmf_.push_back(p > 0.0 ? std::log(p) : kNegInf);
  dist.pmf_ = std::move(pmf);
  return dist;
}

double StateDurationDist::Pmf(int u) const {
  if (u < 1 || u > MaxFrames()) return 0.0;
  return pmf_[u - 1];
}

double StateDurationDist::LogPmf(int u) const {
  if (u < 1 || u > MaxFrames()) return kNegInf;
  return log_pmf_[u - 1];
}

int StateDurationDist::Mode() const {
  auto it = std::max_element(pmf_.begin(), pmf_.end());
  return static_cast<int>(it - pmf_.begin()) + 1;
}

double GeometricOccupancy(double p_self, int u) {
  if (!(p_self >= 0.0 && p_self < 1.0))
    throw ValidationError("self-transition probability must be in [0, 1)");
  if (u < 1) throw ValidationError("occupancy must be >= 1");
  return (1.0 - p_self) * std::pow(p_self, u - 1);
}

double LogGaussianDurationDensity(double x_s, double mu_s, double gamma) {
  const double sigma = gamma * mu_s;
  const double z = (x_s - mu_s) / sigma;
  return -0.5 * z * z - std::log(std::sqrt(2.0 * std::numbers::pi) * sigma);
}

}  // namespace scorematch
