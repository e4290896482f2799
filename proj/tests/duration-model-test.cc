// tests/duration-model-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "scorematch/duration-model.h"
#include "scorematch/text-io.h"
#include "test-util.h"

using namespace scorematch;
using scorematch::testing::IntIn;
using scorematch::testing::Unit;

namespace {

DurationStats StatsOf(std::vector<std::pair<std::string, double>> c) {
  DurationStats s;
  for (auto &[p, v] : c) {
    s.centroids[p] = v;
    s.counts[p] = 1;
  }
  return s;
}

double Sum(const std::vector<double> &v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST_CASE("centroids are arithmetic means") {
  std::vector<AnnotationRecord> recs = {{"a", 0.4}, {"a", 0.6}, {"b", 1.0}};
  auto stats = ComputeDurationStats(recs);
  CHECK(stats.centroids.size() == 2);
  CHECK(stats.Centroid("a") == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(stats.Centroid("b") == 1.0);
  CHECK(stats.counts.at("a") == 2);

  std::vector<AnnotationRecord> single = {{"a", 0.5}};
  CHECK(ComputeDurationStats(single).Centroid("a") == 0.5);
  CHECK_THROWS_AS(ComputeDurationStats({}), ValidationError);
  CHECK_THROWS_AS(stats.Centroid("z"), ValidationError);
}

TEST_CASE("centroid of Normal(0.61, 0.1) samples") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> dist(0.61, 0.1);
  std::vector<AnnotationRecord> recs;
  while (recs.size() < 1000) {
    double d = dist(rng);
    if (d > 0.0) recs.push_back({"x", d});
  }
  CHECK(std::abs(ComputeDurationStats(recs).Centroid("x") - 0.61) <= 0.02);
}

TEST_CASE("duration stats file round-trips") {
  std::vector<AnnotationRecord> recs = {{"a", 0.1}, {"a", 0.35}, {"r\\'", 1.0 / 3}};
  auto stats = ComputeDurationStats(recs);
  std::ostringstream os;
  stats.Write(os);
  std::istringstream is(os.str());
  auto back = DurationStats::Read(is, "stats");
  CHECK(back.centroids == stats.centroids);
  CHECK(back.counts == stats.counts);
  std::istringstream bad("a\t0\t1\n");
  CHECK_THROWS_AS(DurationStats::Read(bad, "s"), ValidationError);
}

TEST_CASE("syllable split of the flowchart example") {
  auto stats = StatsOf({{"p1", 0.46}, {"p2", 0.9}, {"p3", 0.1}});
  std::vector<std::string> phones = {"p1", "p2", "p3"};
  auto d = SplitSyllableDuration(2.0, phones, stats);
  REQUIRE(d.size() == 3);
  // Published (rounded) values.
  CHECK(std::abs(d[0] - 0.64) <= 0.02);
  CHECK(std::abs(d[1] - 1.24) <= 0.02);
  CHECK(std::abs(d[2] - 0.12) <= 0.02);
  // Exact proportions.
  CHECK(d[0] / 2.0 == doctest::Approx(0.46 / 1.46).epsilon(1e-12));
  CHECK(d[1] / 2.0 == doctest::Approx(0.9 / 1.46).epsilon(1e-12));
  CHECK(d[2] / 2.0 == doctest::Approx(0.1 / 1.46).epsilon(1e-12));
  CHECK(std::abs(Sum(d) - 2.0) <= 1e-9);
}

TEST_CASE("syllable split trivial cases and errors") {
  auto stats = StatsOf({{"a", 0.3}, {"b", 0.2}, {"c", 0.2}, {"d", 0.2}});
  std::vector<std::string> one = {"a"};
  CHECK(SplitSyllableDuration(1.0, one, stats) == std::vector<double>{1.0});
  std::vector<std::string> three = {"b", "c", "d"};
  for (double v : SplitSyllableDuration(3.0, three, stats))
    CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<std::string> missing = {"a", "q"};
  try {
    SplitSyllableDuration(1.0, missing, stats);
    FAIL("expected missing-centroid error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("'q'") != std::string::npos);
  }
  CHECK_THROWS_AS(SplitSyllableDuration(0.0, one, stats), ValidationError);
}

TEST_CASE("syllable split is permutation-equivariant and scale-invariant") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    int n = IntIn(rng, 1, 6);
    DurationStats stats, scaled;
    std::vector<std::string> phones;
    double scale = 0.1 + 10.0 * Unit(rng);
    for (int i = 0; i < n; ++i) {
      std::string p = "p" + std::to_string(i);
      double c = 0.01 + Unit(rng);
      stats.centroids[p] = c;
      scaled.centroids[p] = c * scale;
      phones.push_back(p);
    }
    double dur = 0.1 + 5.0 * Unit(rng);
    auto base = SplitSyllableDuration(dur, phones, stats);
    CHECK(std::abs(Sum(base) - dur) <= 1e-9);
    auto s = SplitSyllableDuration(dur, phones, scaled);
    for (int i = 0; i < n; ++i)
      CHECK(s[i] == doctest::Approx(base[i]).epsilon(1e-12));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> permuted;
    for (int i : perm) permuted.push_back(phones[i]);
    auto pd = SplitSyllableDuration(dur, permuted, stats);
    for (int i = 0; i < n; ++i)
      CHECK(pd[i] == doctest::Approx(base[perm[i]]).epsilon(1e-12));
  }
}

TEST_CASE("path normalization") {
  std::vector<double> d = {1.0, 3.0};
  CHECK(NormalizePathDurations(d, 2.0) == std::vector<double>{0.5, 1.5});
  std::vector<double> fig = {0.64, 1.24, 0.12};
  auto same = NormalizePathDurations(fig, 2.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(same[i] - fig[i]) <= 1e-9);
  CHECK_THROWS_AS(NormalizePathDurations(std::vector<double>{}, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(NormalizePathDurations(d, 0.0), ValidationError);
  std::vector<double> neg = {1.0, -1.0};
  CHECK_THROWS_AS(NormalizePathDurations(neg, 1.0), ValidationError);
}

TEST_CASE("path normalization sum and idempotence properties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> d(IntIn(rng, 1, 40));
    for (double &v : d) v = 1e-3 + 3.0 * Unit(rng);
    double q = 0.05 + 30.0 * Unit(rng);
    auto once = NormalizePathDurations(d, q);
    CHECK(std::abs(Sum(once) - q) <= 1e-9);
    auto twice = NormalizePathDurations(once, q);
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK(std::abs(twice[i] - once[i]) <= 1e-9);
  }
}

TEST_CASE("discretized duration mode placement") {
  auto first = StateDurationDist::Discretize(0.01, 0.1, 0.01);
  CHECK(first.Mode() == 1);
  auto fifty = StateDurationDist::Discretize(0.5, 0.1, 0.01);
  CHECK(fifty.Mode() == 50);
  // M = ceil((0.5 + 4 * 0.05) / 0.01) = 70.
  CHECK(fifty.MaxFrames() == 70);
  CHECK(fifty.Pmf(0) == 0.0);
  CHECK(fifty.Pmf(71) == 0.0);
  CHECK(std::isinf(fifty.LogPmf(71)));
}

TEST_CASE("discretized duration pmf is normalized and unimodal") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    double hop = 0.005 + 0.02 * Unit(rng);
    double mu = 0.001 + 2.0 * Unit(rng);
    double gamma = 0.02 + 2.0 * Unit(rng);
    auto dist = StateDurationDist::Discretize(mu, gamma, hop);
    auto pmf = dist.PmfValues();
    double total = 0.0;
    for (double p : pmf) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-9);
    CHECK(dist.MaxFrames() >= 1);
    int mode = dist.Mode();
    int expected = std::clamp(static_cast<int>(std::lround(mu / hop)), 1,
                              dist.MaxFrames());
    CHECK(mode == expected);
    for (int u = 1; u < mode; ++u) CHECK(dist.Pmf(u) <= dist.Pmf(u + 1));
    for (int u = mode; u < dist.MaxFrames(); ++u)
      CHECK(dist.Pmf(u) >= dist.Pmf(u + 1));
  }
}

TEST_CASE("discretize rejects non-positive arguments") {
  CHECK_THROWS_AS(StateDurationDist::Discretize(0.0, 0.1, 0.01),
                  ValidationError);
  CHECK_THROWS_AS(StateDurationDist::Discretize(0.1, 0.0, 0.01),
                  ValidationError);
  CHECK_THROWS_AS(StateDurationDist::Discretize(0.1, 0.1, -0.01),
                  ValidationError);
}

TEST_CASE("pmf constructor validation") {
  CHECK_NOTHROW(StateDurationDist::FromPmf({0.25, 0.75}, 0.1, 0.1, 0.01));
  CHECK_THROWS_AS(StateDurationDist::FromPmf({0.5, 0.4}, 0.1, 0.1, 0.01),
                  ValidationError);
  CHECK_THROWS_AS(StateDurationDist::FromPmf({1.5, -0.5}, 0.1, 0.1, 0.01),
                  ValidationError);
  auto d = StateDurationDist::FromPmf({0.0, 1.0}, 0.1, 0.1, 0.01);
  CHECK(std::isinf(d.LogPmf(1)));
  CHECK(d.LogPmf(2) == 0.0);
}

TEST_CASE("geometric occupancy") {
  CHECK(GeometricOccupancy(0.5, 3) == 0.125);
  CHECK(GeometricOccupancy(0.0, 1) == 1.0);
  CHECK(GeometricOccupancy(0.0, 2) == 0.0);
  CHECK_THROWS_AS(GeometricOccupancy(1.0, 1), ValidationError);
  CHECK_THROWS_AS(GeometricOccupancy(-0.1, 1), ValidationError);
  CHECK_THROWS_AS(GeometricOccupancy(0.5, 0), ValidationError);
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    double p = 0.9 * Unit(rng);
    int u = IntIn(rng, 1, 30);
    CHECK(GeometricOccupancy(p, u) ==
          doctest::Approx((1 - p) * std::pow(p, u - 1)).epsilon(1e-14));
    double total = 0.0;
    for (int k = 1; k <= 10000; ++k) total += GeometricOccupancy(p, k);
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
}

TEST_CASE("log gaussian density at the mean") {
  double mu = 0.3, gamma = 0.2;
  CHECK(LogGaussianDurationDensity(mu, mu, gamma) ==
        doctest::Approx(-std::log(std::sqrt(2 * M_PI) * gamma * mu))
            .epsilon(1e-14));
}
