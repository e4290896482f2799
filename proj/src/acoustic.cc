// src/acoustic.cc

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

#include "scorematch/acoustic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "random-util.h"
#include "scorematch/text-io.h"

namespace scorematch {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogSumExp(std::span<const double> v) {
  double top = kNegInf;
  for (double x : v) top = std::max(top, x);
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - top);
  return top + std::log(sum);
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

// Component log-densities of frame x, including log weights.
void ComponentLogLikes(const DiagGmm &gmm, std::span<const double> x,
                       std::vector<double> *out) {
  const std::size_t dim = x.size();
  const std::size_t num_comp = gmm.NumComponents();
  out->resize(num_comp);
  for (std::size_t k = 0; k < num_comp; ++k) {
    if (gmm.weights[k] <= 0.0) {
      (*out)[k] = kNegInf;
      continue;
    }
    double acc = std::log(gmm.weights[k]);
    for (std::size_t d = 0; d < dim; ++d) {
      double var = gmm.variances[k * dim + d];
      double diff = x[d] - gmm.means[k * dim + d];
      acc -= 0.5 * (std::log(2.0 * std::numbers::pi * var) + diff * diff / var);
    }
    (*out)[k] = acc;
  }
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::size_t num_frames, std::size_t dim,
                             std::vector<double> data, double hop_s)
    : num_frames_(num_frames), dim_(dim), data_(std::move(data)),
      hop_s_(hop_s) {
  if (num_frames_ < 1 || dim_ < 1)
    throw ValidationError("feature matrix needs T >= 1 and D >= 1");
  if (data_.size() != num_frames_ * dim_)
    throw ValidationError("feature matrix data has wrong size");
  if (!(hop_s_ > 0.0)) throw ValidationError("feature hop must be positive");
  for (double v : data_)
    if (!std::isfinite(v))
      throw ValidationError("feature matrix contains a non-finite value");
}

FeatureMatrix FeatureMatrix::Read(std::istream &is, std::string_view source) {
  auto lines = ReadContentLines(is);
  if (lines.empty()) throw ParseError(std::string(source) + ": empty file");
  auto header = SplitOnWhitespace(lines[0].text);
  if (header.size() != 3)
    throw ParseError(Where(source, lines[0].number) +
                     "expected header 'T D hop_s'");
  long long num_frames, dim;
  double hop_s;
  try {
    num_frames = ParseInt(header[0], "T");
    dim = ParseInt(header[1], "D");
    hop_s = ParseDouble(header[2], "hop_s");
  } catch (const ParseError &e) {
    throw ParseError(Where(source, lines[0].number) + e.what());
  }
  if (num_frames < 1 || dim < 1)
    throw ValidationError(Where(source, lines[0].number) +
                          "T and D must be >= 1");
  if (static_cast<long long>(lines.size()) - 1 != num_frames)
    throw ParseError(std::string(source) + ": header says " +
                     std::to_string(num_frames) + " frames, found " +
                     std::to_string(lines.size() - 1));
  std::vector<double> data;
  data.reserve(num_frames * dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto fields = SplitOnWhitespace(lines[i].text);
    if (static_cast<long long>(fields.size()) != dim)
      throw ParseError(Where(source, lines[i].number) + "expected " +
                       std::to_string(dim) + " values");
    for (const auto &f : fields) {
      try {
        data.push_back(ParseDouble(f, "feature"));
      } catch (const ParseError &e) {
        throw ParseError(Where(source, lines[i].number) + e.what());
      }
    }
  }
  try {
    return FeatureMatrix(num_frames, dim, std::move(data), hop_s);
  } catch (const ValidationError &e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
}

FeatureMatrix FeatureMatrix::Load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return Read(is, path.string());
}

void FeatureMatrix::Write(std::ostream &os) const {
  os << num_frames_ << ' ' << dim_ << ' ' << FormatDouble17(hop_s_) << '\n';
  for (std::size_t t = 0; t < num_frames_; ++t) {
    auto row = Row(t);
    for (std::size_t d = 0; d < dim_; ++d)
      os << (d ? " " : "") << FormatDouble17(row[d]);
    os << '\n';
  }
}

double DiagGmm::LogLikelihood(std::span<const double> x) const {
  std::vector<double> comp;
  ComponentLogLikes(*this, x, &comp);
  return LogSumExp(comp);
}

void GmmModel::Validate() const {
  if (dim < 1) throw ValidationError("GMM dimension must be >= 1");
  if (labels.empty()) throw ValidationError("GMM has no classes");
  if (priors.size() != labels.size() || classes.size() != labels.size())
    throw ValidationError("GMM class tables have inconsistent sizes");
  double prior_sum = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ValidationError("GMM prior must be >= 0");
    prior_sum += p;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9)
    throw ValidationError("GMM priors must sum to 1");
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto &g = classes[c];
    const std::size_t k = g.NumComponents();
    if (k < 1 || g.means.size() != k * dim || g.variances.size() != k * dim)
      throw ValidationError("GMM class '" + labels[c] +
                            "' has inconsistent sizes");
    double w_sum = 0.0;
    for (double w : g.weights) {
      if (!(w >= 0.0)) throw ValidationError("GMM weight must be >= 0");
      w_sum += w;
    }
    if (std::abs(w_sum - 1.0) > 1e-9)
      throw ValidationError("GMM weights of class '" + labels[c] +
                            "' must sum to 1");
    for (double v : g.variances)
      if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError("GMM variances must be positive");
    for (double m : g.means)
      if (!std::isfinite(m)) throw ValidationError("GMM mean not finite");
  }
}

GmmModel GmmModel::ReorderedFor(const PhonemeInventory &inventory) const {
  if (inventory.Size() != labels.size())
    throw ValidationError("GMM has " + std::to_string(labels.size()) +
                          " classes, inventory has " +
                          std::to_string(inventory.Size()));
  GmmModel out;
  out.dim = dim;
  out.labels = inventory.Labels();
  out.priors.resize(labels.size());
  out.classes.resize(labels.size());
  std::vector<char> filled(labels.size(), 0);
  for (std::size_t c = 0; c < labels.size(); ++c) {
    std::size_t idx = inventory.IndexOf(labels[c]);
    out.priors[idx] = priors[c];
    out.classes[idx] = classes[c];
    filled[idx] = 1;
  }
  for (std::size_t i = 0; i < filled.size(); ++i)
    if (!filled[i])
      throw ValidationError("GMM lacks class '" + out.labels[i] + "'");
  return out;
}

GmmModel GmmModel::Read(std::istream &is, std::string_view source) {
  auto lines = ReadContentLines(is);
  std::size_t i = 0;
  auto next = [&]() -> const TextLine & {
    if (i >= lines.size())
      throw ParseError(std::string(source) + ": unexpected end of file");
    return lines[i++];
  };
  const TextLine &magic = next();
  if (SplitOnWhitespace(magic.text) !=
      std::vector<std::string>{"scorematch-gmm", "1"})
    throw ParseError(Where(source, magic.number) +
                     "expected 'scorematch-gmm 1'");
  GmmModel model;
  const TextLine &dims = next();
  auto dim_fields = SplitOnWhitespace(dims.text);
  long long num_classes = 0;
  try {
    if (dim_fields.size() != 2) throw ParseError("expected 'D P'");
    long long d = ParseInt(dim_fields[0], "D");
    num_classes = ParseInt(dim_fields[1], "P");
    if (d < 1 || num_classes < 1) throw ParseError("D and P must be >= 1");
    model.dim = static_cast<std::size_t>(d);
  } catch (const ParseError &e) {
    throw ParseError(Where(source, dims.number) + e.what());
  }
  for (long long c = 0; c < num_classes; ++c) {
    const TextLine &head = next();
    auto f = SplitOnWhitespace(head.text);
    long long num_comp = 0;
    try {
      if (f.size() != 4 || f[0] != "class")
        throw ParseError("expected 'class <label> <prior> <K>'");
      model.labels.push_back(f[1]);
      model.priors.push_back(ParseDouble(f[2], "prior"));
      num_comp = ParseInt(f[3], "K");
      if (num_comp < 1) throw ParseError("K must be >= 1");
    } catch (const ParseError &e) {
      throw ParseError(Where(source, head.number) + e.what());
    }
    DiagGmm g;
    for (long long k = 0; k < num_comp; ++k) {
      const TextLine &comp = next();
      auto v = SplitOnWhitespace(comp.text);
      try {
        if (v.size() != 1 + 2 * model.dim)
          throw ParseError("expected weight, " + std::to_string(model.dim) +
                           " means and " + std::to_string(model.dim) +
                           " variances");
        g.weights.push_back(ParseDouble(v[0], "weight"));
        for (std::size_t d = 0; d < model.dim; ++d)
          g.means.push_back(ParseDouble(v[1 + d], "mean"));
        for (std::size_t d = 0; d < model.dim; ++d)
          g.variances.push_back(ParseDouble(v[1 + model.dim + d], "variance"));
      } catch (const ParseError &e) {
        throw ParseError(Where(source, comp.number) + e.what());
      }
    }
    model.classes.push_back(std::move(g));
  }
  if (i != lines.size())
    throw ParseError(Where(source, lines[i].number) + "trailing content");
  try {
    model.Validate();
  } catch (const ValidationError &e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
  return model;
}

GmmModel GmmModel::Load(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open " + path.string());
  return Read(is, path.string());
}

void GmmModel::Write(std::ostream &os) const {
  os << "scorematch-gmm 1\n" << dim << ' ' << labels.size() << '\n';
  for (std::size_t c = 0; c < labels.size(); ++c) {
    const auto &g = classes[c];
    os << "class " << labels[c] << ' ' << FormatDouble17(priors[c]) << ' '
       << g.NumComponents() << '\n';
    for (std::size_t k = 0; k < g.NumComponents(); ++k) {
      os << FormatDouble17(g.weights[k]);
      for (std::size_t d = 0; d < dim; ++d)
        os << ' ' << FormatDouble17(g.means[k * dim + d]);
      for (std::size_t d = 0; d < dim; ++d)
        os << ' ' << FormatDouble17(g.variances[k * dim + d]);
      os << '\n';
    }
  }
}

bool GmmModel::operator==(const GmmModel &o) const {
  if (dim != o.dim || labels != o.labels || priors != o.priors ||
      classes.size() != o.classes.size())
    return false;
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (classes[c].weights != o.classes[c].weights ||
        classes[c].means != o.classes[c].means ||
        classes[c].variances != o.classes[c].variances)
      return false;
  return true;
}

namespace {

// Seeded k-means++ centers followed by one hard assignment to get initial
// weights, means and variances.
DiagGmm KMeansPlusPlusInit(const FeatureMatrix &x, int num_comp,
                           double variance_floor, std::mt19937_64 &rng) {
  const std::size_t n = x.NumFrames(), dim = x.Dim();
  std::vector<std::size_t> centers;
  centers.push_back(static_cast<std::size_t>(Uniform01(rng) * n));
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < num_comp) {
    const auto last = x.Row(centers.back());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], SquaredDistance(x.Row(i), last));
      total += dist2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double r = Uniform01(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        r -= dist2[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(Uniform01(rng) * n);
    }
    centers.push_back(pick);
  }

  DiagGmm g;
  g.weights.assign(num_comp, 0.0);
  g.means.assign(num_comp * dim, 0.0);
  g.variances.assign(num_comp * dim, 0.0);
  std::vector<std::size_t> assign(n);
  std::vector<double> counts(num_comp, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < num_comp; ++k) {
      double d = SquaredDistance(x.Row(i), x.Row(centers[k]));
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    assign[i] = best;
    counts[best] += 1.0;
    for (std::size_t d = 0; d < dim; ++d)
      g.means[best * dim + d] += x.Row(i)[d];
  }
  // Global variance for components with fewer than two frames.
  std::vector<double> global_mean(dim, 0.0), global_var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) global_mean[d] += x.Row(i)[d] / n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      double diff = x.Row(i)[d] - global_mean[d];
      global_var[d] += diff * diff / n;
    }
  for (int k = 0; k < num_comp; ++k) {
    g.weights[k] = counts[k] / n;
    for (std::size_t d = 0; d < dim; ++d) {
      if (counts[k] > 0.0)
        g.means[k * dim + d] /= counts[k];
      else
        g.means[k * dim + d] = x.Row(centers[k])[d];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      double diff = x.Row(i)[d] - g.means[assign[i] * dim + d];
      g.variances[assign[i] * dim + d] += diff * diff;
    }
  for (int k = 0; k < num_comp; ++k)
    for (std::size_t d = 0; d < dim; ++d) {
      double &v = g.variances[k * dim + d];
      v = counts[k] >= 2.0 ? v / counts[k] : global_var[d];
      v = std::max(v, variance_floor);
    }
  return g;
}

// E-step: fills responsibilities (n x K) and returns the mean per-frame
// log-likelihood.
double Expectation(const FeatureMatrix &x, const DiagGmm &g,
                   std::vector<double> *resp) {
  const std::size_t n = x.NumFrames(), num_comp = g.NumComponents();
  resp->resize(n * num_comp);
  std::vector<double> comp;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ComponentLogLikes(g, x.Row(i), &comp);
    double ll = LogSumExp(comp);
    total += ll;
    for (std::size_t k = 0; k < num_comp; ++k)
      (*resp)[i * num_comp + k] = std::exp(comp[k] - ll);
  }
  return total / n;
}

void Maximization(const FeatureMatrix &x, const std::vector<double> &resp,
                  double variance_floor, DiagGmm *g) {
  const std::size_t n = x.NumFrames(), dim = x.Dim();
  const std::size_t num_comp = g->NumComponents();
  for (std::size_t k = 0; k < num_comp; ++k) {
    double occ = 0.0;
    for (std::size_t i = 0; i < n; ++i) occ += resp[i * num_comp + k];
    g->weights[k] = occ / n;
    // A starved component keeps its parameters; its weight is ~0.
    if (occ < 1e-10) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        m += resp[i * num_comp + k] * x.Row(i)[d];
      m /= occ;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double diff = x.Row(i)[d] - m;
        v += resp[i * num_comp + k] * diff * diff;
      }
      g->means[k * dim + d] = m;
      g->variances[k * dim + d] = std::max(v / occ, variance_floor);
    }
  }
  double w_sum = 0.0;
  for (double w : g->weights) w_sum += w;
  for (double &w : g->weights) w /= w_sum;
}

}  // namespace

DiagGmm FitDiagGmm(const FeatureMatrix &frames, const GmmFitOptions &opts,
                   std::vector<double> *history) {
  if (opts.components < 1 || opts.max_iters < 1)
    throw ValidationError("GMM fit needs components >= 1 and max_iters >= 1");
  if (frames.NumFrames() < static_cast<std::size_t>(opts.components))
    throw ValidationError("GMM fit needs at least " +
                          std::to_string(opts.components) + " frames, got " +
                          std::to_string(frames.NumFrames()));
  std::mt19937_64 rng(opts.seed);
  DiagGmm g = KMeansPlusPlusInit(frames, opts.components, opts.variance_floor,
                                 rng);
  std::vector<double> resp;
  double ll = Expectation(frames, g, &resp);
  if (history != nullptr) history->assign(1, ll);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Maximization(frames, resp, opts.variance_floor, &g);
    double next = Expectation(frames, g, &resp);
    if (history != nullptr) history->push_back(next);
    bool converged = next - ll < opts.tolerance;
    ll = next;
    if (converged) break;
  }
  return g;
}

GmmModel FitGmmEm(const std::map<std::string, FeatureMatrix> &by_class,
                  const GmmFitOptions &opts,
                  std::map<std::string, std::vector<double>> *history) {
  if (by_class.empty()) throw ValidationError("GMM fit needs >= 1 class");
  GmmModel model;
  model.dim = by_class.begin()->second.Dim();
  std::size_t total_frames = 0;
  for (const auto &[label, frames] : by_class) {
    if (frames.Dim() != model.dim)
      throw ValidationError("class '" + label +
                            "' has a different feature dimension");
    total_frames += frames.NumFrames();
  }
  std::uint64_t class_seed = opts.seed;
  for (const auto &[label, frames] : by_class) {
    GmmFitOptions class_opts = opts;
    class_opts.seed = class_seed++;
    std::vector<double> hist;
    try {
      model.classes.push_back(FitDiagGmm(
          frames, class_opts, history != nullptr ? &hist : nullptr));
    } catch (const ValidationError &e) {
      throw ValidationError("class '" + label + "': " + e.what());
    }
    model.labels.push_back(label);
    model.priors.push_back(static_cast<double>(frames.NumFrames()) /
                           total_frames);
    if (history != nullptr) (*history)[label] = std::move(hist);
  }
  return model;
}

ObservationMatrix Posteriorize(const FeatureMatrix &features,
                               const GmmModel &model) {
  if (features.Dim() != model.dim)
    throw ValidationError("feature dimension " +
                          std::to_string(features.Dim()) +
                          " does not match model dimension " +
                          std::to_string(model.dim));
  const std::size_t num_classes = model.NumClasses();
  std::vector<double> out(features.NumFrames() * num_classes);
  std::vector<double> row(num_classes);
  for (std::size_t t = 0; t < features.NumFrames(); ++t) {
    for (std::size_t c = 0; c < num_classes; ++c)
      row[c] = (model.priors[c] > 0.0 ? std::log(model.priors[c]) : kNegInf) +
               model.classes[c].LogLikelihood(features.Row(t));
    double norm = LogSumExp(row);
    if (norm == kNegInf)
      throw ValidationError("frame " + std::to_string(t) +
                            " has zero likelihood under every class");
    for (std::size_t c = 0; c < num_classes; ++c)
      out[t * num_classes + c] = row[c] - norm;
  }
  return ObservationMatrix(features.NumFrames(), num_classes, std::move(out),
                           features.HopSeconds());
}

double FrameAccuracy(const ObservationMatrix &obs,
                     std::span<const std::size_t> labels) {
  if (labels.size() != obs.NumFrames())
    throw ValidationError("label count " + std::to_string(labels.size()) +
                          " does not match frame count " +
                          std::to_string(obs.NumFrames()));
  std::size_t correct = 0;
  for (std::size_t t = 0; t < obs.NumFrames(); ++t) {
    auto row = obs.Row(t);
    auto argmax = std::max_element(row.begin(), row.end()) - row.begin();
    if (static_cast<std::size_t>(argmax) == labels[t]) ++correct;
  }
  return static_cast<double>(correct) / obs.NumFrames();
}

SynthQuery SynthesizeQuery(const DecodablePath &path, std::size_t num_classes,
                           const SynthOptions &opts) {
  if (!(opts.noise_temp >= 0.0) || !std::isfinite(opts.noise_temp))
    throw ValidationError("noise_temp must be >= 0");
  if (path.states.empty())
    throw ValidationError("cannot synthesize from an empty path");
  if (num_classes < 1) throw ValidationError("need at least one class");
  for (const auto &s : path.states)
    if (s.phoneme_index >= num_classes)
      throw ValidationError("path phoneme outside the class range");

  std::mt19937_64 rng(opts.seed);
  SynthQuery q;
  // Occupancies: inverse-CDF draw from each state's pmf.
  for (const auto &s : path.states) {
    int u = s.duration.Mode();
    if (!opts.occupancy_at_mode) {
      double r = Uniform01(rng);
      auto pmf = s.duration.PmfValues();
      u = static_cast<int>(pmf.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        if (r < acc) {
          u = static_cast<int>(i) + 1;
          break;
        }
      }
    }
    q.occupancies.push_back(u);
    for (int k = 0; k < u; ++k) q.frame_labels.push_back(s.phoneme_index);
  }

  // Rows: mass 1 / (1 + tau (P - 1)) on the true class and tau times that on
  // every other class, mixed with weight tau / (1 + tau) into a flat
  // Dirichlet draw (normalized Exp(1) variates), then renormalized.
  const double tau = opts.noise_temp;
  const double on = 1.0 / (1.0 + tau * (num_classes - 1.0));
  const double off = tau * on;
  const double mix = tau / (1.0 + tau);
  const std::size_t num_frames = q.frame_labels.size();
  std::vector<double> data(num_frames * num_classes);
  std::vector<double> row(num_classes), jitter(num_classes);
  for (std::size_t t = 0; t < num_frames; ++t) {
    double jitter_sum = 0.0;
    if (mix > 0.0) {
      for (auto &g : jitter) {
        g = -std::log1p(-Uniform01(rng));
        jitter_sum += g;
      }
    }
    double row_sum = 0.0;
    for (std::size_t p = 0; p < num_classes; ++p) {
      double base = p == q.frame_labels[t] ? on : off;
      row[p] = mix > 0.0 ? (1.0 - mix) * base + mix * jitter[p] / jitter_sum
                         : base;
      row_sum += row[p];
    }
    for (std::size_t p = 0; p < num_classes; ++p)
      data[t * num_classes + p] =
          row[p] > 0.0 ? std::log(row[p] / row_sum) : kNegInf;
  }
  const double hop_s = path.states.front().duration.HopSeconds();
  q.obs = ObservationMatrix(num_frames, num_classes, std::move(data), hop_s);
  return q;
}

}  // namespace scorematch
