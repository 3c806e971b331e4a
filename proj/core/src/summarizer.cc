// Copyright 2026 The VernQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vernqa/summarizer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vernqa/error.h"
#include "vernqa/rng.h"
#include "vernqa/text_util.h"

namespace vernqa {

using Eigen::MatrixXd;

SentenceSet split_sentences(std::string_view text) {
  SentenceSet out;
  std::size_t start = 0;
  std::size_t pos = 0;
  auto emit = [&](std::size_t end) {
    std::string s = trim(text.substr(start, end - start));
    if (!s.empty()) out.sentences.push_back({std::move(s), out.sentences.size()});
    start = end;
  };
  while (pos < text.size()) {
    const char32_t cp = next_code_point(text, pos);
    if (cp != '.' && cp != '?' && cp != '!') continue;
    if (pos == text.size()) break;
    std::size_t peek = pos;
    if (is_unicode_space(next_code_point(text, peek))) emit(pos);
  }
  emit(text.size());
  return out;
}

KRule KRule::parse(const std::string& spec) {
  if (spec == "sqrt") return sqrt();
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "fixed") {
      const long long k = std::stoll(arg, &used);
      if (used == arg.size() && k >= 1) return fixed_k(static_cast<std::size_t>(k));
    } else if (kind == "ratio") {
      const double r = std::stod(arg, &used);
      if (used == arg.size() && r > 0.0 && r <= 1.0) return ratio_of(r);
    }
  } catch (const std::logic_error&) {
  }
  throw InvalidArgument("bad k rule '" + spec + "' (expected sqrt, fixed:<k>, ratio:<r>)");
}

std::string KRule::to_string() const {
  switch (kind) {
    case Kind::kFixed:
      return "fixed:" + std::to_string(fixed);
    case Kind::kRatio:
      return "ratio:" + std::to_string(ratio);
    default:
      return "sqrt";
  }
}

std::size_t resolve_k(const SummaryConfig& cfg, std::size_t n) {
  double k = 1.0;
  switch (cfg.k_rule.kind) {
    case KRule::Kind::kSqrt:
      k = std::round(std::sqrt(static_cast<double>(n)));
      break;
    case KRule::Kind::kFixed:
      k = static_cast<double>(cfg.k_rule.fixed);
      break;
    case KRule::Kind::kRatio:
      k = std::round(cfg.k_rule.ratio * static_cast<double>(n));
      break;
  }
  const std::size_t cap = std::max<std::size_t>(1, std::min(n, cfg.max_sentences));
  return std::clamp(static_cast<std::size_t>(std::max(1.0, k)), std::size_t{1}, cap);
}

namespace {

double sq_dist(const MatrixXd& a, Eigen::Index i, const MatrixXd& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// Assigns each point to its nearest center (ties to the lower index) and
// returns the objective.
double assign_points(const MatrixXd& points, const MatrixXd& centers,
                     std::vector<std::size_t>& assignment) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = sq_dist(points, i, centers, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(c);
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
    total += best_d;
  }
  return total;
}

MatrixXd plus_plus_init(const MatrixXd& points, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  MatrixXd centers(static_cast<Eigen::Index>(k), points.cols());
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.row(0) = points.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points, static_cast<Eigen::Index>(i), centers, 0);

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (d2[i] > 0.0 && cum > r) {
          pick = i;
          break;
        }
      }
      // Rounding can leave r == total; take the last positive-weight point.
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a center.
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points, static_cast<Eigen::Index>(i), centers,
                                      static_cast<Eigen::Index>(c)));
    }
  }
  return centers;
}

// Recomputes centers as member means. Empty clusters take the point
// farthest from its own center, which then moves to that cluster.
void update_centers(const MatrixXd& points, std::vector<std::size_t>& assignment,
                    MatrixXd& centers) {
  const auto k = static_cast<std::size_t>(centers.rows());
  std::vector<std::size_t> counts(k, 0);
  MatrixXd sums = MatrixXd::Zero(centers.rows(), centers.cols());
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    sums.row(static_cast<Eigen::Index>(assignment[i])) += points.row(static_cast<Eigen::Index>(i));
    ++counts[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      centers.row(static_cast<Eigen::Index>(c)) =
          sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (counts[assignment[i]] <= 1) continue;  // never empty another cluster
      const double d = sq_dist(points, static_cast<Eigen::Index>(i), centers,
                               static_cast<Eigen::Index>(assignment[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far_d < 0.0) continue;
    --counts[assignment[far]];
    assignment[far] = c;
    counts[c] = 1;
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
  }
}

}  // namespace

KMeansResult kmeans(const MatrixXd& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw InvalidArgument("kmeans: no points");
  if (k < 1 || k > n) throw InvalidArgument("kmeans: k must be in [1, n]");

  Rng rng(seed);
  KMeansResult r;
  r.centers = plus_plus_init(points, k, rng);
  r.assignment.assign(n, 0);
  r.objective_trace.push_back(assign_points(points, r.centers, r.assignment));

  std::vector<std::size_t> next(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    update_centers(points, r.assignment, r.centers);
    r.objective_trace.push_back(assign_points(points, r.centers, next));
    ++r.iterations;
    const bool fixpoint = next == r.assignment;
    r.assignment = next;
    if (fixpoint) break;
  }
  return r;
}

Summary summarize(const SentenceSet& sentences, const SentenceEmbedder& embed,
                  const SummaryConfig& cfg) {
  if (sentences.empty()) throw InvalidArgument("summarize: no sentences");
  const std::size_t n = sentences.size();
  Summary out;
  out.k_used = resolve_k(cfg, n);
  if (out.k_used >= n) {
    out.sentences = sentences.sentences;
    return out;
  }

  MatrixXd points;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd v = embed(sentences.sentences[i].text);
    if (i == 0) points.resize(static_cast<Eigen::Index>(n), v.size());
    if (v.size() != points.cols()) throw InvalidArgument("summarize: embedder dimension changed");
    points.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }

  const KMeansResult km = kmeans(points, out.k_used, cfg.kmeans_seed, cfg.kmeans_max_iters);
  out.objective_trace = km.objective_trace;

  // Representatives are measured against the centroids of the final
  // clusters, which equal km.centers unless max_iters cut the run short.
  std::vector<std::size_t> counts(out.k_used, 0);
  MatrixXd centroids = MatrixXd::Zero(static_cast<Eigen::Index>(out.k_used), points.cols());
  for (std::size_t i = 0; i < n; ++i) {
    centroids.row(static_cast<Eigen::Index>(km.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
    ++counts[km.assignment[i]];
  }
  std::vector<std::size_t> picks;
  for (std::size_t c = 0; c < out.k_used; ++c) {
    if (counts[c] == 0) continue;
    const auto ci = static_cast<Eigen::Index>(c);
    centroids.row(ci) /= static_cast<double>(counts[c]);
    std::size_t best = n;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (km.assignment[i] != c) continue;
      const double d = sq_dist(points, static_cast<Eigen::Index>(i), centroids, ci);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    picks.push_back(best);
  }
  std::sort(picks.begin(), picks.end());
  for (std::size_t i : picks) out.sentences.push_back(sentences.sentences[i]);
  return out;
}

}  // namespace vernqa
