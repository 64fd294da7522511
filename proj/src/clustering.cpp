#include "topictrace/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topictrace/errors.hpp"
#include "topictrace/parallel.hpp"
#include "topictrace/rng.hpp"

namespace topictrace {

std::string_view to_string(Metric metric) { return metric == Metric::euclidean ? "euclidean" : "jsd"; }

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::euclidean;
  if (text == "jsd") return Metric::jsd;
  throw InvalidArgument("unknown metric '" + std::string(text) + "' (euclidean|jsd)");
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_points(std::span<const TopicDistribution> points) {
  if (points.empty()) throw InvalidArgument("no points to cluster");
  for (const auto& p : points)
    if (p.size() != points.front().size()) throw LengthMismatch("points differ in dimension");
}

// Symmetric n x n table of pairwise distances.
std::vector<double> pairwise(std::span<const TopicDistribution> points, Metric metric,
                             unsigned threads) {
  const std::size_t n = points.size();
  std::vector<double> table(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(points[i].values(), points[j].values(), metric);
      table[i * n + j] = d;
      table[j * n + i] = d;
    }
  });
  return table;
}

double silhouette_from_table(std::span<const double> table, std::span<const std::size_t> assignment,
                             std::size_t k) {
  const std::size_t n = assignment.size();
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t c : assignment) ++sizes[c];
  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignment[i];
    if (sizes[own] == 1) continue;  // s(i) = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sums[assignment[j]] += table[i * n + j];
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) throw LengthMismatch("distance: vectors differ in length");
  return metric == Metric::euclidean ? std::sqrt(squared_distance(a, b)) : js_distance(a, b);
}

std::vector<std::size_t> Clustering::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (std::size_t c : assignment) ++out[c];
  return out;
}

std::size_t count_distinct(std::span<const TopicDistribution> points) {
  std::vector<std::span<const double>> views;
  views.reserve(points.size());
  for (const auto& p : points) views.push_back(p.values());
  auto less = [](std::span<const double> a, std::span<const double> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  };
  std::sort(views.begin(), views.end(), less);
  auto eq = [](std::span<const double> a, std::span<const double> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
  };
  return static_cast<std::size_t>(std::unique(views.begin(), views.end(), eq) - views.begin());
}

Clustering kmeans(std::span<const TopicDistribution> points, std::size_t k, std::uint64_t seed) {
  check_points(points);
  if (k < 1) throw InvalidArgument("k must be >= 1");
  const std::size_t distinct = count_distinct(points);
  if (distinct < k)
    throw TooFewDistinctPoints("k = " + std::to_string(k) + " but only " +
                               std::to_string(distinct) + " distinct points");
  const std::size_t n = points.size(), dim = points.front().size();
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<std::vector<double>> centers;
  centers.reserve(k);
  {
    const auto first = points[rng.below(n)].values();
    centers.emplace_back(first.begin(), first.end());
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i].values(), centers[0]);
    while (centers.size() < k) {
      const auto pick = points[rng.categorical(d2)].values();
      centers.emplace_back(pick.begin(), pick.end());
      for (std::size_t i = 0; i < n; ++i)
        d2[i] = std::min(d2[i], squared_distance(points[i].values(), centers.back()));
    }
  }

  Clustering result;
  result.k = k;
  std::vector<std::size_t> assignment(n, 0), previous;
  std::vector<double> nearest(n);
  auto update_means = [&] {
    std::vector<std::size_t> sizes(k, 0);
    for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ++sizes[assignment[i]];
      const auto p = points[i].values();
      for (std::size_t j = 0; j < dim; ++j) centers[assignment[i]][j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (sizes[c] > 0)
        for (double& v : centers[c]) v /= static_cast<double>(sizes[c]);
    return sizes;
  };
  auto current_wcss = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += squared_distance(points[i].values(), centers[assignment[i]]);
    return s;
  };

  for (std::size_t iter = 1; iter <= kMaxLloydIterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(points[i].values(), centers[c]);
        if (d < best) {
          best = d;
          assignment[i] = c;
        }
      }
      nearest[i] = best;
    }
    result.iterations = iter;
    if (assignment == previous) break;

    auto sizes = update_means();
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      // Empty cluster: take over the point farthest from its centroid.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (sizes[assignment[i]] > 1 && (far == n || nearest[i] > nearest[far])) far = i;
      --sizes[assignment[far]];
      assignment[far] = c;
      sizes[c] = 1;
      nearest[far] = 0.0;
      sizes = update_means();
    }
    result.wcss_trace.push_back(current_wcss());
    previous = assignment;
  }

  update_means();
  result.wcss = current_wcss();
  result.assignment = std::move(assignment);
  result.centroids.reserve(k);
  for (auto& c : centers) result.centroids.push_back(TopicDistribution::normalized(std::move(c)));
  return result;
}

double silhouette(std::span<const TopicDistribution> points, const Clustering& clustering,
                  Metric metric) {
  if (clustering.k < 2) throw SingleCluster("silhouette is undefined for a single cluster");
  check_points(points);
  if (clustering.assignment.size() != points.size())
    throw InvalidArgument("clustering does not cover the points");
  const auto table = pairwise(points, metric, 1);
  return silhouette_from_table(table, clustering.assignment, clustering.k);
}

Clustering select_k(std::span<const TopicDistribution> points, const SelectKOptions& options) {
  check_points(points);
  if (options.k_min < 2) throw InvalidArgument("k_min must be >= 2");
  if (options.k_max < options.k_min) throw InvalidArgument("k_max must be >= k_min");
  if (options.restarts < 1) throw InvalidArgument("restarts must be >= 1");
  const std::size_t distinct = count_distinct(points);
  if (distinct < options.k_max)
    throw TooFewDistinctPoints("k_max = " + std::to_string(options.k_max) + " but only " +
                               std::to_string(distinct) + " distinct points");

  const auto table = pairwise(points, options.metric, options.threads);
  const std::size_t n_k = options.k_max - options.k_min + 1;
  std::vector<std::optional<Clustering>> best(n_k);
  parallel_for(n_k, options.threads, [&](std::size_t idx) {
    const std::size_t k = options.k_min + idx;
    const std::uint64_t k_seed = split_seed(options.seed, k);
    for (std::size_t r = 0; r < options.restarts; ++r) {
      auto c = kmeans(points, k, split_seed(k_seed, r));
      if (!best[idx] || c.wcss < best[idx]->wcss) best[idx] = std::move(c);
    }
    best[idx]->mean_silhouette = silhouette_from_table(table, best[idx]->assignment, k);
  });

  std::size_t chosen = 0;
  for (std::size_t idx = 1; idx < n_k; ++idx)
    if (*best[idx]->mean_silhouette > *best[chosen]->mean_silhouette) chosen = idx;
  return std::move(*best[chosen]);
}

PerplexitySummary summarize(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("cannot summarize an empty sample");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
  };
  PerplexitySummary s;
  s.min = values.front();
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  s.max = values.back();
  s.values = std::move(values);
  return s;
}

std::vector<TopicDistribution> thetas(const SampleEnsemble& ensemble) {
  std::vector<TopicDistribution> out;
  out.reserve(ensemble.samples.size());
  for (const auto& s : ensemble.samples) out.push_back(s.theta);
  return out;
}

ClusterReport cluster_report(const SampleEnsemble& ensemble, const Clustering& clustering,
                             const TrainedModel& model, std::size_t n_top_words) {
  if (clustering.assignment.size() != ensemble.samples.size())
    throw InvalidArgument("clustering does not match the ensemble");
  ClusterReport report{ensemble.doc_id, clustering.k, clustering.mean_silhouette, {}};
  std::vector<std::vector<double>> perplexities(clustering.k);
  for (std::size_t i = 0; i < ensemble.samples.size(); ++i)
    perplexities.at(clustering.assignment[i]).push_back(ensemble.samples[i].perplexity);
  for (std::size_t c = 0; c < clustering.k; ++c) {
    ClusterSummary s;
    s.size = perplexities[c].size();
    s.dominant_topic = clustering.centroids.at(c).argmax();
    s.top_words = top_words(model, s.dominant_topic, n_top_words);
    s.perplexity = summarize(std::move(perplexities[c]));
    report.clusters.push_back(std::move(s));
  }
  return report;
}

TopicDistribution representative_theta(const SampleEnsemble& ensemble, ThetaPolicy policy,
                                       const SelectKOptions& options) {
  if (policy == ThetaPolicy::ensemble_mean) return ensemble_mean(ensemble);
  const auto points = thetas(ensemble);
  const std::size_t distinct = count_distinct(points);
  Clustering clustering;
  if (distinct < std::max<std::size_t>(2, options.k_min)) {
    clustering = kmeans(points, 1, options.seed);
  } else {
    SelectKOptions clamped = options;
    clamped.k_max = std::min(options.k_max, distinct);
    clustering = select_k(points, clamped);
  }
  const auto sizes = clustering.sizes();
  const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  return clustering.centroids[largest];
}

}  // namespace topictrace
