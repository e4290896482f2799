// tests/matching-network-test.cc

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

#include <numeric>
#include <random>
#include <sstream>

#include "scorematch/matching-network.h"
#include "scorematch/text-io.h"
#include "test-util.h"

using namespace scorematch;
using scorematch::testing::DataDir;
using scorematch::testing::IntIn;
using scorematch::testing::Unit;

namespace {

struct Fixture {
  PhonemeInventory inventory = PhonemeInventory::Load(DataDir() / "phonemes.txt");
  PronunciationDictionary dict =
      PronunciationDictionary::Load(DataDir() / "pinyin-xsampa.dict");
  DurationStats stats = ComputeDurationStats(
      LoadAnnotations(DataDir() / "example-annotations.txt"));
};

const Fixture &Fix() {
  static const Fixture fixture;
  return fixture;
}

std::vector<ScorePhrase> RandomPhrases(std::mt19937_64 &rng, std::size_t n) {
  std::vector<std::string> keys;
  for (const auto &[k, v] : Fix().dict.Entries()) keys.push_back(k);
  std::vector<ScorePhrase> phrases;
  for (std::size_t i = 0; i < n; ++i) {
    ScorePhrase p;
    p.phrase_id = "ph" + std::to_string(i);
    p.role = i % 2 ? RoleType::kLaosheng : RoleType::kDan;
    int syllables = IntIn(rng, 1, 8);
    for (int s = 0; s < syllables; ++s)
      p.syllables.push_back({keys[IntIn(rng, 0, int(keys.size()) - 1)],
                             0.25 * IntIn(rng, 1, 12)});
    phrases.push_back(std::move(p));
  }
  return phrases;
}

double SumOfMeans(const DecodablePath &path) {
  double sum = 0.0;
  for (const auto &s : path.states) sum += s.duration.MuSeconds();
  return sum;
}

}  // namespace

TEST_CASE("one phrase of five syllables gives a 12-state path") {
  std::vector<ScorePhrase> phrases = {
      {"p", RoleType::kDan,
       {{"yan", 1}, {"jian", 1}, {"de", 0.5}, {"hong", 2}, {"ri", 4}}}};
  auto net = BuildNetwork(phrases, Fix().dict, Fix().stats);
  REQUIRE(net.K() == 1);
  const auto &path = net.Path(0);
  CHECK(path.states.size() == 12);
  CHECK(path.states[0].phoneme == "j");
  CHECK(path.states[11].phoneme == "1");
  // Per-syllable durations are preserved by the split.
  CHECK(path.states[6].mu_s == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(path.TotalSeconds() == doctest::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("network size equals phrase count") {
  std::mt19937_64 rng(916);
  auto phrases = RandomPhrases(rng, 916);
  auto net = BuildNetwork(phrases, Fix().dict, Fix().stats);
  CHECK(net.K() == 916);
  CHECK(net.Find("ph915") == 915);
  CHECK(net.Find("absent") == net.K());
}

TEST_CASE("empty phrase list is rejected") {
  std::vector<ScorePhrase> none;
  CHECK_THROWS_AS(BuildNetwork(none, Fix().dict, Fix().stats),
                  ValidationError);
}

TEST_CASE("build errors carry the phrase id") {
  std::vector<ScorePhrase> phrases = {
      {"bad-one", RoleType::kDan, {{"yan", 1}, {"qqq", 1}}}};
  try {
    BuildNetwork(phrases, Fix().dict, Fix().stats);
    FAIL("expected OOV error");
  } catch (const ValidationError &e) {
    std::string msg = e.what();
    CHECK(msg.find("bad-one") != std::string::npos);
    CHECK(msg.find("qqq") != std::string::npos);
  }
  DurationStats partial;
  partial.centroids["j"] = 0.1;
  partial.counts["j"] = 1;
  std::vector<ScorePhrase> yan = {{"only", RoleType::kDan, {{"yan", 1}}}};
  CHECK_THROWS_AS(BuildNetwork(yan, Fix().dict, partial), ValidationError);
}

TEST_CASE("network validation") {
  CHECK_THROWS_AS(MatchingNetwork({{"a", RoleType::kDan, {}}}),
                  ValidationError);
  CHECK_THROWS_AS(MatchingNetwork({{"a", RoleType::kDan, {{"j", 0.0}}}}),
                  ValidationError);
  CHECK_THROWS_AS(MatchingNetwork({{"a", RoleType::kDan, {{"j", 0.1}}},
                                   {"a", RoleType::kDan, {{"j", 0.1}}}}),
                  ValidationError);
}

TEST_CASE("instantiated means sum to the query duration") {
  std::mt19937_64 rng(3);
  auto net = BuildNetwork(RandomPhrases(rng, 40), Fix().dict, Fix().stats);
  auto qp = InstantiateForQuery(net, 10.0, 0.1, 0.01, Fix().inventory);
  CHECK(qp.excluded.empty());
  REQUIRE(qp.paths.size() == net.K());
  for (std::size_t k = 0; k < qp.paths.size(); ++k) {
    CHECK(std::abs(SumOfMeans(qp.paths[k]) - 10.0) < 1e-6);
    CHECK(qp.paths[k].NumStates() == net.Path(k).states.size());
    for (std::size_t j = 0; j < qp.paths[k].NumStates(); ++j)
      CHECK(Fix().inventory.Label(qp.paths[k].states[j].phoneme_index) ==
            net.Path(k).states[j].phoneme);
  }
}

TEST_CASE("single-state path takes the full query duration") {
  MatchingNetwork net({{"solo", RoleType::kDan, {{"a", 0.3}}}});
  auto qp = InstantiateForQuery(net, 2.0, 0.1, 0.01, Fix().inventory);
  REQUIRE(qp.paths.size() == 1);
  REQUIRE(qp.paths[0].NumStates() == 1);
  CHECK(qp.paths[0].states[0].duration.MuSeconds() == doctest::Approx(2.0));
  CHECK(qp.paths[0].states[0].phoneme_index == Fix().inventory.IndexOf("a"));
}

TEST_CASE("path with more states than frames is excluded") {
  std::vector<ScorePhrase> phrases = {
      {"twelve", RoleType::kDan,
       {{"yan", 1}, {"jian", 1}, {"de", 1}, {"hong", 1}, {"ri", 1}}},
      {"short", RoleType::kDan, {{"de", 1}}}};
  auto net = BuildNetwork(phrases, Fix().dict, Fix().stats);
  auto qp = InstantiateForQuery(net, 0.11, 0.1, 0.01, Fix().inventory);
  REQUIRE(qp.excluded.size() == 1);
  CHECK(qp.excluded[0].phrase_id == "twelve");
  CHECK(!qp.excluded[0].reason.empty());
  REQUIRE(qp.paths.size() == 1);
  CHECK(qp.paths[0].phrase_id == "short");
  // Exactly as many frames as states is still decodable.
  auto exact = InstantiateForQuery(net, 0.12, 0.1, 0.01, Fix().inventory);
  CHECK(exact.excluded.empty());
}

TEST_CASE("query instantiation errors") {
  MatchingNetwork net({{"solo", RoleType::kDan, {{"zz", 0.3}}}});
  CHECK_THROWS_AS(InstantiateForQuery(net, 1.0, 0.1, 0.01, Fix().inventory),
                  ValidationError);
  MatchingNetwork ok({{"solo", RoleType::kDan, {{"a", 0.3}}}});
  CHECK_THROWS_AS(InstantiateForQuery(ok, 0.0, 0.1, 0.01, Fix().inventory),
                  ValidationError);
  CHECK_THROWS_AS(InstantiateForQuery(ok, 1.0, 0.0, 0.01, Fix().inventory),
                  ValidationError);
}

TEST_CASE("decodable paths do not depend on seconds per unit") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    auto phrases = RandomPhrases(rng, 5);
    double spu_a = 0.05 + Unit(rng), spu_b = 0.05 + 3.0 * Unit(rng);
    auto net_a = BuildNetwork(phrases, Fix().dict, Fix().stats, spu_a);
    auto net_b = BuildNetwork(phrases, Fix().dict, Fix().stats, spu_b);
    double query = 1.0 + 9.0 * Unit(rng);
    auto qa = InstantiateForQuery(net_a, query, 0.2, 0.01, Fix().inventory);
    auto qb = InstantiateForQuery(net_b, query, 0.2, 0.01, Fix().inventory);
    REQUIRE(qa.paths.size() == qb.paths.size());
    for (std::size_t k = 0; k < qa.paths.size(); ++k) {
      REQUIRE(qa.paths[k].NumStates() == qb.paths[k].NumStates());
      for (std::size_t j = 0; j < qa.paths[k].NumStates(); ++j) {
        const auto &da = qa.paths[k].states[j].duration;
        const auto &db = qb.paths[k].states[j].duration;
        CHECK(std::abs(da.MuSeconds() - db.MuSeconds()) < 1e-9);
        REQUIRE(da.MaxFrames() == db.MaxFrames());
        for (int u = 1; u <= da.MaxFrames(); ++u)
          CHECK(std::abs(da.Pmf(u) - db.Pmf(u)) < 1e-9);
      }
    }
  }
}

TEST_CASE("state counts equal phonetization lengths") {
  std::mt19937_64 rng(23);
  auto phrases = RandomPhrases(rng, 100);
  auto net = BuildNetwork(phrases, Fix().dict, Fix().stats);
  for (std::size_t k = 0; k < phrases.size(); ++k) {
    auto pinyin = phrases[k].Pinyin();
    auto phones = Phonetize(pinyin, Fix().dict);
    REQUIRE(net.Path(k).states.size() == phones.size());
    for (std::size_t j = 0; j < phones.size(); ++j)
      CHECK(net.Path(k).states[j].phoneme == phones[j]);
  }
}

TEST_CASE("network file round-trip") {
  std::mt19937_64 rng(29);
  auto net = BuildNetwork(RandomPhrases(rng, 30), Fix().dict, Fix().stats,
                          0.37);
  std::ostringstream os;
  net.Write(os);
  std::istringstream is(os.str());
  CHECK(MatchingNetwork::Read(is, "net") == net);

  std::istringstream bad("a\tdan\tj 0.1 En\n");
  CHECK_THROWS_AS(MatchingNetwork::Read(bad, "net"), ParseError);
}

TEST_CASE("frames for duration rounds to nearest") {
  CHECK(FramesForDuration(0.11, 0.01) == 11);
  CHECK(FramesForDuration(2.0, 0.01) == 200);
  CHECK(FramesForDuration(0.014, 0.01) == 1);
}

TEST_CASE("normalized duration supports always cover the query") {
  std::mt19937_64 rng(31);
  auto net = BuildNetwork(RandomPhrases(rng, 60), Fix().dict, Fix().stats);
  for (int trial = 0; trial < 200; ++trial) {
    double query = 0.01 * IntIn(rng, 1, 1500) + 0.001 * Unit(rng);
    double gamma = 0.05 + 2.0 * Unit(rng);
    auto strict = InstantiateForQuery(net, query, gamma, 0.01, Fix().inventory);
    auto loose =
        InstantiateForQuery(net, query, gamma, 0.01, Fix().inventory, false);
    CHECK(strict.paths.size() == loose.paths.size());
    CHECK(strict.excluded.size() == loose.excluded.size());
  }
}
