#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topictrace/corpus.hpp"
#include "topictrace/date.hpp"
#include "topictrace/topic_model.hpp"

namespace topictrace {

// All logarithms are base 2; results are in bits.

// D(P||Q) = sum_k p_k log2(p_k / q_k). Throws LengthMismatch, or
// InvalidDistribution when some q_k <= 0 has p_k > 0.
double kl_bits(std::span<const double> p, std::span<const double> q);

// sqrt((D(P||M) + D(Q||M)) / 2) with M = (P + Q) / 2; a metric on [0, 1].
double js_distance(std::span<const double> p, std::span<const double> q);

// 2^(-(1/N) sum_i log2 sum_k θ_k φ_{k,w_i}). Throws EmptyDocument, VocabMismatch,
// LengthMismatch.
double perplexity(const Document& doc, std::span<const double> theta, const TrainedModel& model);
double perplexity(const Document& doc, std::span<const double> theta, const PhiTable& phi);

struct DatedTheta {
  TopicDistribution theta;
  Date date;
  double weight = 1.0;  // 1 per document, or its token count for length weighting
};

struct Mixture {
  TopicDistribution theta;
  std::size_t n_readings;
};

// Weighted mean of θ over readings dated on or before `cutoff`, renormalized.
// Throws NoReadingsYet.
Mixture cumulative_mixture(std::span<const DatedTheta> readings, Date cutoff);

// How a document's single representative θ is taken from its ensemble.
enum class ThetaPolicy { ensemble_mean, largest_cluster_centroid };
std::string_view to_string(ThetaPolicy policy);
ThetaPolicy parse_theta_policy(std::string_view text);

// writing_given_readings is D(writing || readings-to-date).
enum class Direction { writing_given_readings, readings_given_writing };
std::string_view to_string(Direction direction);

struct TimelinePoint {
  Date snapshot_date;
  double kl_bits = 0.0;
  std::size_t n_readings = 0;

  friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

struct DivergenceTimeline {
  std::string target_doc_id;
  std::vector<TimelinePoint> points;
  ThetaPolicy representative_theta_policy = ThetaPolicy::ensemble_mean;
  Direction direction = Direction::writing_given_readings;
};

// One point per snapshot, which must be strictly ascending. Throws
// NoReadingsYet, InvalidArgument.
DivergenceTimeline divergence_timeline(std::string target_doc_id,
                                       std::span<const double> writing_theta,
                                       std::span<const DatedTheta> readings,
                                       std::span<const Date> snapshots,
                                       ThetaPolicy policy = ThetaPolicy::ensemble_mean,
                                       Direction direction = Direction::writing_given_readings);

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<double> d;  // n x n, row-major

  std::size_t size() const noexcept { return labels.size(); }
  double at(std::size_t i, std::size_t j) const { return d[i * labels.size() + j]; }
};

struct LabeledTheta {
  std::string label;
  TopicDistribution theta;
};

// All-pairs js_distance. Throws TooFewDocuments.
DistanceMatrix distance_matrix(std::span<const LabeledTheta> docs, unsigned threads = 1);

}  // namespace topictrace
