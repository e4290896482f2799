// tests/acoustic-test.cc

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

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "scorematch/acoustic.h"
#include "scorematch/decoder.h"
#include "scorematch/text-io.h"
#include "test-util.h"

using namespace scorematch;
using namespace scorematch::testing;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

FeatureMatrix GaussianFrames(std::mt19937_64 &rng, std::size_t n,
                             const std::vector<double> &mean, double sd) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> data;
  for (std::size_t t = 0; t < n; ++t)
    for (double m : mean) data.push_back(m + sd * z(rng));
  return FeatureMatrix(n, mean.size(), std::move(data), 0.01);
}

// Frames drawn from a few well-spread blobs.
FeatureMatrix BlobFrames(std::mt19937_64 &rng, std::size_t n, std::size_t dim,
                         int blobs) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<std::vector<double>> centers(blobs, std::vector<double>(dim));
  for (auto &c : centers)
    for (double &x : c) x = 6.0 * z(rng);
  std::vector<double> data;
  for (std::size_t t = 0; t < n; ++t) {
    const auto &c = centers[IntIn(rng, 0, blobs - 1)];
    for (double m : c) data.push_back(m + (0.5 + Unit(rng)) * z(rng));
  }
  return FeatureMatrix(n, dim, std::move(data), 0.01);
}

DiagGmm SingleGaussian(std::vector<double> mean, std::vector<double> var) {
  return {{1.0}, std::move(mean), std::move(var)};
}

DecodablePath GaussianPath(std::mt19937_64 &rng, int states, int classes,
                           double gamma) {
  DecodablePath path;
  path.phrase_id = "synth";
  int prev = -1;
  for (int j = 0; j < states; ++j) {
    int cls;
    do cls = IntIn(rng, 0, classes - 1);
    while (cls == prev);
    prev = cls;
    path.states.push_back(
        {static_cast<std::size_t>(cls),
         StateDurationDist::Discretize(0.03 + 0.2 * Unit(rng), gamma, 0.01)});
  }
  return path;
}

}  // namespace

TEST_CASE("em log-likelihood never decreases") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto frames = BlobFrames(rng, 400, IntIn(rng, 1, 4), IntIn(rng, 2, 6));
    GmmFitOptions opts;
    opts.components = IntIn(rng, 1, 8);
    opts.max_iters = 40;
    opts.seed = trial;
    std::vector<double> history;
    FitDiagGmm(frames, opts, &history);
    REQUIRE(history.size() >= 2);
    for (std::size_t i = 1; i < history.size(); ++i)
      CHECK(history[i] >= history[i - 1] - 1e-8);
  }
}

TEST_CASE("single component fit is the sample mean and variance") {
  std::mt19937_64 rng(2);
  const std::size_t n = 250;
  std::vector<double> data;
  for (std::size_t t = 0; t < n; ++t) {
    data.push_back(3.0 + 2.0 * Unit(rng));
    data.push_back(-1.0);  // constant column: variance hits the floor
  }
  FeatureMatrix frames(n, 2, data, 0.01);
  GmmFitOptions opts;
  opts.components = 1;
  auto gmm = FitDiagGmm(frames, opts);
  REQUIRE(gmm.NumComponents() == 1);
  double mean = 0.0, var = 0.0;
  for (std::size_t t = 0; t < n; ++t) mean += data[2 * t];
  mean /= n;
  for (std::size_t t = 0; t < n; ++t)
    var += (data[2 * t] - mean) * (data[2 * t] - mean);
  var /= n;
  CHECK(gmm.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gmm.means[0] == doctest::Approx(mean).epsilon(1e-10));
  CHECK(gmm.means[1] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(gmm.variances[0] == doctest::Approx(var).epsilon(1e-9));
  CHECK(gmm.variances[1] == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("three separable classes are classified accurately") {
  std::mt19937_64 rng(3);
  const std::vector<std::vector<double>> centers = {
      {0.0, 0.0}, {6.0, 6.0}, {-6.0, 6.0}};
  const std::vector<std::string> names = {"a", "b", "c"};
  std::map<std::string, FeatureMatrix> train;
  for (int c = 0; c < 3; ++c)
    train[names[c]] = GaussianFrames(rng, 300, centers[c], 1.0);
  GmmFitOptions opts;
  opts.components = 4;
  opts.seed = 3;
  auto model = FitGmmEm(train, opts);
  CHECK(model.labels == names);
  for (double prior : model.priors)
    CHECK(prior == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  std::vector<double> data;
  std::vector<std::size_t> labels;
  for (int t = 0; t < 600; ++t) {
    int c = t % 3;
    auto f = GaussianFrames(rng, 1, centers[c], 1.0);
    data.insert(data.end(), f.Data().begin(), f.Data().end());
    labels.push_back(c);
  }
  FeatureMatrix test(600, 2, data, 0.01);
  auto obs = Posteriorize(test, model);
  CHECK(obs.RowsNormalized(1e-6));
  double acc = FrameAccuracy(obs, labels);
  MESSAGE("frame accuracy " << acc);
  CHECK(acc >= 0.95);
}

TEST_CASE("fit errors") {
  std::mt19937_64 rng(4);
  std::map<std::string, FeatureMatrix> train;
  train["big"] = GaussianFrames(rng, 50, {0.0}, 1.0);
  train["tiny"] = GaussianFrames(rng, 3, {0.0}, 1.0);
  GmmFitOptions opts;
  opts.components = 5;
  try {
    FitGmmEm(train, opts);
    FAIL("expected too-few-frames error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("tiny") != std::string::npos);
  }
  CHECK_THROWS_AS(FeatureMatrix(1, 1, {std::nan("")}, 0.01), ValidationError);
  CHECK_THROWS_AS(
      FeatureMatrix(1, 1, {std::numeric_limits<double>::infinity()}, 0.01),
      ValidationError);
  std::map<std::string, FeatureMatrix> mixed;
  mixed["a"] = GaussianFrames(rng, 10, {0.0}, 1.0);
  mixed["b"] = GaussianFrames(rng, 10, {0.0, 1.0}, 1.0);
  opts.components = 1;
  CHECK_THROWS_AS(FitGmmEm(mixed, opts), ValidationError);
}

TEST_CASE("posterior rows are distributions") {
  std::mt19937_64 rng(5);
  std::map<std::string, FeatureMatrix> train;
  for (std::string name : {"x", "y", "z", "w"})
    train[name] = BlobFrames(rng, 120, 3, 3);
  GmmFitOptions opts;
  opts.components = 3;
  auto model = FitGmmEm(train, opts);
  // Far-away frames stress the log-sum-exp.
  auto frames = BlobFrames(rng, 200, 3, 4);
  std::vector<double> far(frames.Data().begin(), frames.Data().end());
  for (double &x : far) x *= 50.0;
  for (const auto &f : {frames, FeatureMatrix(200, 3, far, 0.01)}) {
    auto obs = Posteriorize(f, model);
    CHECK(obs.NumClasses() == 4);
    for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
      double sum = 0.0;
      for (double v : obs.Row(t)) sum += std::exp(v);
      CHECK(std::abs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("identical class models give uniform rows") {
  GmmModel model;
  model.dim = 2;
  model.labels = {"a", "b", "c", "d", "e"};
  model.priors.assign(5, 0.2);
  DiagGmm g{{0.3, 0.7}, {0.0, 1.0, 2.0, -1.0}, {1.0, 0.5, 2.0, 0.25}};
  model.classes.assign(5, g);
  std::mt19937_64 rng(6);
  auto frames = GaussianFrames(rng, 50, {0.0, 0.0}, 3.0);
  auto obs = Posteriorize(frames, model);
  for (std::size_t t = 0; t < obs.NumFrames(); ++t)
    for (double v : obs.Row(t)) CHECK(std::abs(v - std::log(0.2)) < 1e-12);
}

TEST_CASE("tight mode dominates its frame") {
  GmmModel model;
  model.dim = 2;
  model.labels = {"sharp", "broad"};
  model.priors = {0.5, 0.5};
  model.classes = {SingleGaussian({1.0, -1.0}, {1e-3, 1e-3}),
                   SingleGaussian({0.0, 0.0}, {1.0, 1.0})};
  FeatureMatrix at_mode(1, 2, {1.0, -1.0}, 0.01);
  auto obs = Posteriorize(at_mode, model);
  CHECK(std::exp(obs(0, 0)) > 0.99);
  FeatureMatrix wrong_dim(1, 3, {1.0, -1.0, 0.0}, 0.01);
  CHECK_THROWS_AS(Posteriorize(wrong_dim, model), ValidationError);
}

TEST_CASE("frame accuracy") {
  std::mt19937_64 rng(7);
  auto obs = RandomObservations(rng, 40, 5);
  std::vector<std::size_t> argmax, never;
  for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
    auto row = obs.Row(t);
    std::size_t best = 0;
    for (std::size_t p = 1; p < row.size(); ++p)
      if (row[p] > row[best]) best = p;
    argmax.push_back(best);
    never.push_back((best + 1) % 5);
  }
  CHECK(FrameAccuracy(obs, argmax) == 1.0);
  CHECK(FrameAccuracy(obs, never) == 0.0);
  never.pop_back();
  CHECK_THROWS_AS(FrameAccuracy(obs, never), ValidationError);

  // Ties go to the lowest index.
  ObservationMatrix tied(1, 3, {std::log(0.4), std::log(0.4), std::log(0.2)},
                         0.01);
  CHECK(FrameAccuracy(tied, std::vector<std::size_t>{0}) == 1.0);
  CHECK(FrameAccuracy(tied, std::vector<std::size_t>{1}) == 0.0);
}

TEST_CASE("frame accuracy ignores monotone row transforms") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto obs = RandomObservations(rng, 30, 6);
    std::vector<std::size_t> labels;
    for (int t = 0; t < 30; ++t) labels.push_back(IntIn(rng, 0, 5));
    std::vector<double> warped;
    for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
      double scale = 0.1 + 5.0 * Unit(rng), offset = -10.0 * Unit(rng);
      for (double v : obs.Row(t))
        warped.push_back(offset - scale * std::sqrt(-v));
    }
    ObservationMatrix w(30, 6, warped, 0.01);
    CHECK(FrameAccuracy(w, labels) == FrameAccuracy(obs, labels));
  }
}

TEST_CASE("synthesis is deterministic for a seed") {
  std::mt19937_64 rng(9);
  auto path = GaussianPath(rng, 8, 6, 0.2);
  SynthOptions opts;
  opts.noise_temp = 0.7;
  opts.seed = 42;
  auto a = SynthesizeQuery(path, 6, opts), b = SynthesizeQuery(path, 6, opts);
  CHECK(a.obs == b.obs);
  CHECK(a.occupancies == b.occupancies);
  CHECK(a.frame_labels == b.frame_labels);
  opts.seed = 43;
  auto c = SynthesizeQuery(path, 6, opts);
  CHECK(!(c.obs == a.obs));
  CHECK(a.obs.RowsNormalized(1e-9));
}

TEST_CASE("noiseless synthesis gives one-hot rows") {
  std::mt19937_64 rng(10);
  auto path = GaussianPath(rng, 6, 4, 0.3);
  SynthOptions opts;
  opts.seed = 1;
  auto q = SynthesizeQuery(path, 4, opts);
  int total = 0;
  for (int u : q.occupancies) total += u;
  REQUIRE(q.obs.NumFrames() == static_cast<std::size_t>(total));
  for (std::size_t t = 0; t < q.obs.NumFrames(); ++t)
    for (std::size_t p = 0; p < 4; ++p)
      CHECK(q.obs(t, p) == (p == q.frame_labels[t] ? 0.0 : kNegInf));
  for (std::size_t j = 0; j < path.NumStates(); ++j) {
    CHECK(q.occupancies[j] >= 1);
    CHECK(q.occupancies[j] <= path.states[j].duration.MaxFrames());
    CHECK(path.states[j].duration.Pmf(q.occupancies[j]) > 0.0);
  }
}

TEST_CASE("noiseless synthesis at the mode is recovered exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto path = GaussianPath(rng, IntIn(rng, 1, 10), 5, 0.1 + 0.5 * Unit(rng));
    SynthOptions opts;
    opts.seed = trial;
    opts.occupancy_at_mode = true;
    auto q = SynthesizeQuery(path, 5, opts);
    double duration_only = 0.0;
    for (std::size_t j = 0; j < path.NumStates(); ++j) {
      CHECK(q.occupancies[j] == path.states[j].duration.Mode());
      duration_only += path.states[j].duration.LogPmf(q.occupancies[j]);
    }
    auto out = HsmmViterbi(q.obs, path);
    CHECK(out.occupancies == q.occupancies);
    CHECK(out.log_posterior == doctest::Approx(duration_only).epsilon(1e-12));
  }
}

TEST_CASE("noiseless sampled occupancies are recovered when neighbours differ") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    auto path = GaussianPath(rng, IntIn(rng, 1, 10), 5, 0.4);
    SynthOptions opts;
    opts.seed = 100 + trial;
    auto q = SynthesizeQuery(path, 5, opts);
    CHECK(HsmmViterbi(q.obs, path).occupancies == q.occupancies);
  }
}

TEST_CASE("synthesis errors") {
  std::mt19937_64 rng(13);
  auto path = GaussianPath(rng, 3, 4, 0.2);
  SynthOptions opts;
  opts.noise_temp = -0.1;
  CHECK_THROWS_AS(SynthesizeQuery(path, 4, opts), ValidationError);
  opts.noise_temp = 0.5;
  CHECK_THROWS_AS(SynthesizeQuery(path, 2, opts), ValidationError);
}

TEST_CASE("gmm model serialization is bit-exact") {
  std::mt19937_64 rng(14);
  std::map<std::string, FeatureMatrix> train;
  for (std::string name : {"k", "s", "a"})
    train[name] = BlobFrames(rng, 90, 3, 2);
  GmmFitOptions opts;
  opts.components = 3;
  auto model = FitGmmEm(train, opts);
  std::ostringstream os;
  model.Write(os);
  std::istringstream is(os.str());
  auto back = GmmModel::Read(is, "gmm");
  CHECK(back == model);
  std::ostringstream again;
  back.Write(again);
  CHECK(again.str() == os.str());

  std::istringstream wrong_version("scorematch-gmm 2\n1 1\n");
  CHECK_THROWS_AS(GmmModel::Read(wrong_version, "gmm"), ParseError);
}

TEST_CASE("gmm model validation and reordering") {
  GmmModel model;
  model.dim = 1;
  model.labels = {"b", "a"};
  model.priors = {0.25, 0.75};
  model.classes = {SingleGaussian({1.0}, {1.0}), SingleGaussian({-1.0}, {2.0})};
  model.Validate();
  auto re = model.ReorderedFor(PhonemeInventory(std::vector<std::string>{"a", "b"}));
  CHECK(re.labels == std::vector<std::string>{"a", "b"});
  CHECK(re.priors == std::vector<double>{0.75, 0.25});
  CHECK(re.classes[0].means[0] == -1.0);
  CHECK_THROWS_AS(
      model.ReorderedFor(PhonemeInventory(std::vector<std::string>{"a", "c"})),
      ValidationError);

  auto bad = model;
  bad.priors = {0.5, 0.6};
  CHECK_THROWS_AS(bad.Validate(), ValidationError);
  bad = model;
  bad.classes[0].variances[0] = 0.0;
  CHECK_THROWS_AS(bad.Validate(), ValidationError);
  bad = model;
  bad.classes[1].weights = {0.9};
  CHECK_THROWS_AS(bad.Validate(), ValidationError);
}

TEST_CASE("feature file round-trip") {
  std::mt19937_64 rng(15);
  auto f = BlobFrames(rng, 25, 4, 2);
  std::ostringstream os;
  f.Write(os);
  std::istringstream is(os.str());
  auto back = FeatureMatrix::Read(is, "feat");
  CHECK(std::equal(back.Data().begin(), back.Data().end(), f.Data().begin(),
                   f.Data().end()));
  CHECK(back.Dim() == 4);
}
