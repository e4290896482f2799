// tools/scorematch.cc

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

// Command-line front end: builds networks, decodes and scores queries,
// runs grid searches and the GMM baseline.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scorematch/acoustic.h"
#include "scorematch/decoder.h"
#include "scorematch/duration-model.h"
#include "scorematch/eval.h"
#include "scorematch/matching-network.h"
#include "scorematch/score-model.h"
#include "scorematch/text-io.h"

namespace {

using namespace scorematch;

std::ofstream OpenOutput(const std::string &path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  return os;
}

// Options shared by decode, match and gridsearch.
struct ModeOptions {
  std::string mode = "hsmm";
  std::optional<double> gamma;
  double alpha = kDefaultAlpha;
  std::string role = "dan";
  unsigned threads = 0;

  void Register(CLI::App *app, bool with_params = true) {
    app->add_option("--mode", mode, "Decoder: hsmm, hmm or hmm-post")
        ->check(CLI::IsMember({"hsmm", "hmm", "hmm-post", "hmm_post"}))
        ->capture_default_str();
    if (with_params) {
      app->add_option("--gamma", gamma,
                      "Duration spread sigma = gamma * mu (default: 0.1, or "
                      "0.7 / 1.5 for hmm-post on dan / laosheng)");
      app->add_option("--alpha", alpha, "Post-processor duration weight")
          ->capture_default_str();
      app->add_option("--role", role,
                      "Role type used to pick the default gamma")
          ->check(CLI::IsMember({"dan", "laosheng"}))
          ->capture_default_str();
    }
    app->add_option("--threads", threads,
                    "Decoding threads (0 = hardware concurrency)")
        ->capture_default_str();
  }

  MatchParams Params() const {
    MatchParams p;
    p.mode = ParseDecodeMode(mode);
    p.gamma = gamma ? *gamma : DefaultGamma(p.mode, ParseRoleType(role));
    p.alpha = alpha;
    p.num_threads = threads;
    return p;
  }
};

std::string JoinInts(const std::vector<int> &v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// label <TAB> feature_file per line, paths relative to the manifest.
std::map<std::string, FeatureMatrix> LoadFeatureManifest(
    const std::filesystem::path &manifest) {
  std::map<std::string, FeatureMatrix> out;
  for (const auto &line : ReadContentLines(manifest)) {
    auto fields = SplitOnChar(line.text, '\t');
    if (fields.size() != 2)
      throw ParseError(Where(manifest.string(), line.number) +
                       "expected 'label<TAB>feature_file'");
    std::filesystem::path file = fields[1];
    if (file.is_relative()) file = manifest.parent_path() / file;
    if (out.count(fields[0]))
      throw ValidationError(Where(manifest.string(), line.number) +
                            "duplicate label '" + fields[0] + "'");
    out[fields[0]] = FeatureMatrix::Load(file);
  }
  if (out.empty()) throw ValidationError(manifest.string() + ": no classes");
  return out;
}

}  // namespace

int main(int argc, char *argv[]) {
  CLI::App app{"Lyrics-based score matching with explicit duration models."};
  app.require_subcommand(1);

  // stats
  std::string annotations, stats_out;
  auto *stats = app.add_subcommand(
      "stats", "Per-phoneme duration centroids from annotation records");
  stats->add_option("annotations", annotations, "phoneme<TAB>duration_s file")
      ->required()->check(CLI::ExistingFile);
  stats->add_option("-o,--out", stats_out, "Output stats file")->required();

  // build-network
  std::string scores, dict_file, stats_file, inventory_file, network_out;
  double seconds_per_unit = kDefaultSecondsPerUnit;
  auto *build = app.add_subcommand(
      "build-network", "Matching network from scores, dictionary and stats");
  build->add_option("--scores", scores, "Score dataset")
      ->required()->check(CLI::ExistingFile);
  build->add_option("--dict", dict_file, "Pinyin to X-SAMPA dictionary")
      ->required()->check(CLI::ExistingFile);
  build->add_option("--stats", stats_file, "Duration stats file")
      ->required()->check(CLI::ExistingFile);
  build->add_option("--inventory", inventory_file,
                    "Check the dictionary against this phoneme inventory")
      ->check(CLI::ExistingFile);
  build->add_option("--seconds-per-unit", seconds_per_unit,
                    "Seconds per score duration unit")
      ->capture_default_str();
  build->add_option("-o,--out", network_out, "Output network file")
      ->required();

  // decode
  std::string query_file, network_file;
  ModeOptions decode_opts;
  auto *decode = app.add_subcommand(
      "decode", "Score every candidate phrase against one posteriorgram");
  decode->add_option("query", query_file, "Observation matrix file")
      ->required()->check(CLI::ExistingFile);
  decode->add_option("--network", network_file, "Network file")
      ->required()->check(CLI::ExistingFile);
  decode->add_option("--inventory", inventory_file, "Phoneme inventory")
      ->required()->check(CLI::ExistingFile);
  decode_opts.Register(decode);

  // match
  std::string manifest, records_out;
  std::vector<int> top_m;
  std::size_t max_candidates = 0;
  ModeOptions match_opts;
  auto *match = app.add_subcommand(
      "match", "Rank candidates for a labeled query set and report MRR");
  match->add_option("queries", manifest,
                    "Query manifest: id<TAB>obs_file<TAB>ground_truth")
      ->required()->check(CLI::ExistingFile);
  match->add_option("--network", network_file, "Network file")
      ->required()->check(CLI::ExistingFile);
  match->add_option("--inventory", inventory_file, "Phoneme inventory")
      ->required()->check(CLI::ExistingFile);
  match->add_option("--top-m", top_m, "Top-M cutoff (repeatable)")
      ->check(CLI::PositiveNumber);
  match->add_option("-o,--out", records_out,
                    "Per-query JSON lines (default: none)");
  match->add_option("--max-candidates", max_candidates,
                    "Candidates per record (0 = all)")
      ->capture_default_str();
  match_opts.Register(match);

  // gridsearch
  std::vector<double> alpha_grid, gamma_grid;
  std::string grid_out;
  ModeOptions grid_opts;
  auto *grid = app.add_subcommand(
      "gridsearch", "MRR over an alpha x gamma grid on a dev query set");
  grid->add_option("queries", manifest, "Dev query manifest")
      ->required()->check(CLI::ExistingFile);
  grid->add_option("--network", network_file, "Network file")
      ->required()->check(CLI::ExistingFile);
  grid->add_option("--inventory", inventory_file, "Phoneme inventory")
      ->required()->check(CLI::ExistingFile);
  grid->add_option("--alpha-grid", alpha_grid,
                   "Alpha values (default 0.25..2 step 0.25)")
      ->delimiter(',');
  grid->add_option("--gamma-grid", gamma_grid,
                   "Gamma values (default 0.1..2 step 0.1)")
      ->delimiter(',');
  grid->add_option("-o,--out", grid_out, "Output grid file (default stdout)");
  grid_opts.Register(grid, false);

  // synth
  std::string out_dir;
  SyntheticQueryOptions synth_opts;
  auto *synth = app.add_subcommand(
      "synth", "Synthetic posteriorgrams with ground truth from a network");
  synth->add_option("--network", network_file, "Network file")
      ->required()->check(CLI::ExistingFile);
  synth->add_option("--inventory", inventory_file, "Phoneme inventory")
      ->required()->check(CLI::ExistingFile);
  synth->add_option("--num-queries", synth_opts.num_queries)
      ->capture_default_str();
  synth->add_option("--noise", synth_opts.noise_temp,
                    "Noise temperature (0 = one-hot rows)")
      ->capture_default_str();
  synth->add_option("--gamma", synth_opts.gamma,
                    "Duration spread used to draw occupancies")
      ->capture_default_str();
  synth->add_option("--hop-s", synth_opts.hop_s, "Frame hop in seconds")
      ->capture_default_str();
  synth->add_option("--tempo-spread", synth_opts.tempo_spread,
                    "Query length factor drawn from [1/s, s]")
      ->capture_default_str();
  synth->add_option("--seed", synth_opts.seed)->capture_default_str();
  synth->add_option("-o,--out-dir", out_dir,
                    "Directory for <id>.obs files and queries.tsv")
      ->required();

  // fit-gmm
  std::string features_manifest, model_out;
  GmmFitOptions fit_opts;
  auto *fit = app.add_subcommand(
      "fit-gmm", "Per-class diagonal GMMs from labeled feature frames");
  fit->add_option("features", features_manifest,
                  "Manifest: label<TAB>feature_file")
      ->required()->check(CLI::ExistingFile);
  fit->add_option("--components", fit_opts.components)
      ->check(CLI::PositiveNumber)->capture_default_str();
  fit->add_option("--max-iters", fit_opts.max_iters)
      ->check(CLI::PositiveNumber)->capture_default_str();
  fit->add_option("--seed", fit_opts.seed)->capture_default_str();
  fit->add_option("-o,--out", model_out, "Output model file")->required();

  // posteriorize
  std::string features_file, model_file, obs_out;
  auto *post = app.add_subcommand(
      "posteriorize", "Log class posteriors of feature frames under a GMM");
  post->add_option("features", features_file, "Feature matrix file")
      ->required()->check(CLI::ExistingFile);
  post->add_option("--model", model_file, "GMM model file")
      ->required()->check(CLI::ExistingFile);
  post->add_option("--inventory", inventory_file,
                   "Order output columns by this inventory")
      ->check(CLI::ExistingFile);
  post->add_option("-o,--out", obs_out, "Output observation file")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) {
      auto recs = LoadAnnotations(annotations);
      auto st = ComputeDurationStats(recs);
      auto os = OpenOutput(stats_out);
      st.Write(os);
      std::cerr << "stats: " << st.centroids.size() << " phonemes from "
                << recs.size() << " records\n";
    } else if (build->parsed()) {
      auto phrases = LoadScoreDataset(scores);
      auto dict = PronunciationDictionary::Load(dict_file);
      if (!inventory_file.empty())
        dict.CheckAgainst(PhonemeInventory::Load(inventory_file));
      auto net = BuildNetwork(phrases, dict, DurationStats::Load(stats_file),
                              seconds_per_unit);
      auto os = OpenOutput(network_out);
      net.Write(os);
      std::cerr << "build-network: K = " << net.K() << " paths\n";
    } else if (decode->parsed()) {
      auto inv = PhonemeInventory::Load(inventory_file);
      auto net = MatchingNetwork::Load(network_file);
      auto obs = ObservationMatrix::Load(query_file);
      auto list = RankCandidates(obs, net, inv, decode_opts.Params());
      std::cout << "# rank\tphrase_id\tlog_score\toccupancies\n";
      for (const auto &c : list.candidates)
        std::cout << c.rank << '\t' << c.phrase_id << '\t'
                  << FormatDoubleShortest(c.log_score) << '\t'
                  << JoinInts(c.occupancies) << '\n';
      for (const auto &e : list.excluded)
        std::cout << "# excluded\t" << e.phrase_id << '\t' << e.reason
                  << '\n';
    } else if (match->parsed()) {
      auto inv = PhonemeInventory::Load(inventory_file);
      auto net = MatchingNetwork::Load(network_file);
      auto queries = LoadQuerySet(manifest);
      if (top_m.empty()) top_m = {1, 5, 10};
      auto report = RunMatch(queries, net, inv, match_opts.Params(), top_m);
      if (!records_out.empty()) {
        auto os = OpenOutput(records_out);
        report.WriteRecords(os, max_candidates);
      }
      report.WriteSummary(std::cout);
    } else if (grid->parsed()) {
      auto inv = PhonemeInventory::Load(inventory_file);
      auto net = MatchingNetwork::Load(network_file);
      auto queries = LoadQuerySet(manifest);
      if (alpha_grid.empty()) alpha_grid = DefaultAlphaGrid();
      if (gamma_grid.empty()) gamma_grid = DefaultGammaGrid();
      auto result = GridSearch(queries, net, inv, ParseDecodeMode(grid_opts.mode),
                               alpha_grid, gamma_grid, grid_opts.threads);
      if (grid_out.empty()) {
        result.Write(std::cout);
      } else {
        auto os = OpenOutput(grid_out);
        result.Write(os);
        std::cout << "best alpha " << FormatDoubleShortest(result.best.alpha)
                  << " gamma " << FormatDoubleShortest(result.best.gamma)
                  << " mrr " << FormatDoubleShortest(result.best.mrr) << '\n';
      }
    } else if (synth->parsed()) {
      auto inv = PhonemeInventory::Load(inventory_file);
      auto net = MatchingNetwork::Load(network_file);
      auto queries = MakeSyntheticQueries(net, inv, synth_opts);
      std::filesystem::create_directories(out_dir);
      WriteQuerySet(out_dir, queries);
      std::cerr << "synth: wrote " << queries.size() << " queries to "
                << out_dir << '\n';
    } else if (fit->parsed()) {
      auto by_class = LoadFeatureManifest(features_manifest);
      auto model = FitGmmEm(by_class, fit_opts);
      auto os = OpenOutput(model_out);
      model.Write(os);
      std::cerr << "fit-gmm: " << model.NumClasses() << " classes, D = "
                << model.dim << '\n';
    } else if (post->parsed()) {
      auto model = GmmModel::Load(model_file);
      if (!inventory_file.empty())
        model = model.ReorderedFor(PhonemeInventory::Load(inventory_file));
      auto obs = Posteriorize(FeatureMatrix::Load(features_file), model);
      auto os = OpenOutput(obs_out);
      obs.Write(os);
    }
  } catch (const std::exception &e) {
    std::cerr << "scorematch: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
