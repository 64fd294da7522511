#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topictrace/divergence.hpp"
#include "topictrace/query_sampler.hpp"
#include "topictrace/topic_model.hpp"

namespace topictrace {

enum class Metric { euclidean, jsd };
std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view text);

double distance(std::span<const double> a, std::span<const double> b, Metric metric);

struct Clustering {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;        // sample index -> cluster id
  std::vector<TopicDistribution> centroids;   // renormalized member means
  std::optional<double> mean_silhouette;      // unset for k = 1 or plain kmeans
  double wcss = 0.0;                          // within-cluster sum of squares
  std::vector<double> wcss_trace;             // after each Lloyd update
  std::size_t iterations = 0;

  std::vector<std::size_t> sizes() const;
};

inline constexpr std::size_t kMaxLloydIterations = 300;

// Number of pairwise-distinct points (exact equality).
std::size_t count_distinct(std::span<const TopicDistribution> points);

// Lloyd's algorithm with k-means++ seeding, Euclidean distance, at most 300
// iterations. An emptied cluster is reseeded with the point farthest from its
// centroid. Throws TooFewDistinctPoints, InvalidArgument.
Clustering kmeans(std::span<const TopicDistribution> points, std::size_t k, std::uint64_t seed);

// Mean of s(i) = (b - a) / max(a, b); members of singleton clusters score 0.
// Throws SingleCluster when k < 2.
double silhouette(std::span<const TopicDistribution> points, const Clustering& clustering,
                  Metric metric = Metric::euclidean);

struct SelectKOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  Metric metric = Metric::euclidean;
  unsigned threads = 1;
};

// For each k in [k_min, k_max] keeps the lowest-WCSS of `restarts` kmeans runs
// and returns the one with the highest mean silhouette (smaller k on ties).
// Restart r for cluster count k is seeded with split_seed(split_seed(seed, k), r).
Clustering select_k(std::span<const TopicDistribution> points, const SelectKOptions& options);

struct PerplexitySummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::vector<double> values;  // ascending
};

// Quartiles by linear interpolation between order statistics.
PerplexitySummary summarize(std::vector<double> values);

struct ClusterSummary {
  std::size_t size = 0;
  std::size_t dominant_topic = 0;
  std::vector<std::pair<std::string, double>> top_words;
  PerplexitySummary perplexity;
};

struct ClusterReport {
  std::string doc_id;
  std::size_t k = 0;
  std::optional<double> mean_silhouette;
  std::vector<ClusterSummary> clusters;
};

ClusterReport cluster_report(const SampleEnsemble& ensemble, const Clustering& clustering,
                             const TrainedModel& model, std::size_t n_top_words = 10);

std::vector<TopicDistribution> thetas(const SampleEnsemble& ensemble);

// Picks the document-level θ used in timelines and distance matrices.
// largest_cluster_centroid runs select_k (or a single cluster if fewer than
// two distinct samples) and returns the centroid of the biggest cluster,
// lowest cluster id on ties.
TopicDistribution representative_theta(const SampleEnsemble& ensemble, ThetaPolicy policy,
                                       const SelectKOptions& options = {});

}  // namespace topictrace
