#include "topictrace/divergence.hpp"

#include <algorithm>
#include <cmath>

#include "topictrace/errors.hpp"
#include "topictrace/parallel.hpp"

namespace topictrace {

double kl_bits(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw LengthMismatch("kl_bits: lengths " + std::to_string(p.size()) + " and " +
                         std::to_string(q.size()));
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (!(q[k] > 0.0)) throw InvalidDistribution("kl_bits: q has zero mass where p does not");
    sum += p[k] * std::log2(p[k] / q[k]);
  }
  return std::max(0.0, sum);
}

double js_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw LengthMismatch("js_distance: lengths " + std::to_string(p.size()) + " and " +
                         std::to_string(q.size()));
  std::vector<double> m(p.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = (p[k] + q[k]) / 2.0;
  const double js = (kl_bits(p, m) + kl_bits(q, m)) / 2.0;
  return std::min(1.0, std::sqrt(js));
}

double perplexity(const Document& doc, std::span<const double> theta, const PhiTable& phi) {
  if (doc.tokens.empty()) throw EmptyDocument("perplexity of empty document '" + doc.doc_id + "'");
  if (theta.size() != phi.num_topics())
    throw LengthMismatch("perplexity: θ has " + std::to_string(theta.size()) + " topics, model " +
                         std::to_string(phi.num_topics()));
  std::vector<WordId> sorted(doc.tokens);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.back() >= phi.vocab_size())
    throw VocabMismatch("perplexity: token id out of model vocabulary");
  // θ_k / (n_k + Vβ) is folded once per topic and θ is renormalized in the
  // same pass; everything up to the final rounding is in extended precision.
  long double theta_sum = 0.0L;
  for (double t : theta) theta_sum += t;
  const auto denoms = phi.denominators();
  std::vector<long double> weight(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) weight[k] = theta[k] / denoms[k] / theta_sum;
  // Each distinct word's probability is evaluated once and weighted by its count.
  // Neumaier-compensated sum of count-weighted log probabilities.
  long double log_sum = 0.0L, compensation = 0.0L;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto num = phi.numerators(sorted[i]);
    long double prob = 0.0L;
    for (std::size_t k = 0; k < theta.size(); ++k) prob += weight[k] * num[k];
    const long double term = static_cast<long double>(j - i) * std::log2(prob);
    const long double t = log_sum + term;
    compensation += std::fabs(log_sum) >= std::fabs(term) ? (log_sum - t) + term : (term - t) + log_sum;
    log_sum = t;
    i = j;
  }
  log_sum += compensation;
  return static_cast<double>(std::exp2(-log_sum / static_cast<long double>(sorted.size())));
}

double perplexity(const Document& doc, std::span<const double> theta, const TrainedModel& model) {
  return perplexity(doc, theta, PhiTable(model));
}

Mixture cumulative_mixture(std::span<const DatedTheta> readings, Date cutoff) {
  std::vector<double> sum;
  std::size_t n = 0;
  for (const auto& r : readings) {
    if (r.date > cutoff) continue;
    if (!(r.weight > 0.0)) throw InvalidArgument("reading weights must be > 0");
    if (sum.empty()) sum.assign(r.theta.size(), 0.0);
    if (r.theta.size() != sum.size()) throw LengthMismatch("reading θ vectors differ in length");
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += r.weight * r.theta[k];
    ++n;
  }
  if (n == 0) throw NoReadingsYet("no readings dated on or before " + cutoff.iso());
  return {TopicDistribution::normalized(std::move(sum)), n};
}

std::string_view to_string(ThetaPolicy policy) {
  return policy == ThetaPolicy::ensemble_mean ? "ensemble-mean" : "largest-cluster-centroid";
}

ThetaPolicy parse_theta_policy(std::string_view text) {
  if (text == "ensemble-mean") return ThetaPolicy::ensemble_mean;
  if (text == "largest-cluster-centroid") return ThetaPolicy::largest_cluster_centroid;
  throw InvalidArgument("unknown θ policy '" + std::string(text) + "'");
}

std::string_view to_string(Direction direction) {
  return direction == Direction::writing_given_readings ? "D(writing||readings)"
                                                        : "D(readings||writing)";
}

DivergenceTimeline divergence_timeline(std::string target_doc_id,
                                       std::span<const double> writing_theta,
                                       std::span<const DatedTheta> readings,
                                       std::span<const Date> snapshots, ThetaPolicy policy,
                                       Direction direction) {
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    if (!(snapshots[i - 1] < snapshots[i]))
      throw InvalidArgument("snapshot dates must be strictly ascending");
  DivergenceTimeline timeline{std::move(target_doc_id), {}, policy, direction};
  timeline.points.reserve(snapshots.size());
  for (const Date& snap : snapshots) {
    const auto mix = cumulative_mixture(readings, snap);
    const double kl = direction == Direction::writing_given_readings
                          ? kl_bits(writing_theta, mix.theta.values())
                          : kl_bits(mix.theta.values(), writing_theta);
    timeline.points.push_back({snap, kl, mix.n_readings});
  }
  return timeline;
}

DistanceMatrix distance_matrix(std::span<const LabeledTheta> docs, unsigned threads) {
  const std::size_t n = docs.size();
  if (n < 2) throw TooFewDocuments("a distance matrix needs at least two documents");
  DistanceMatrix m;
  m.labels.reserve(n);
  for (const auto& d : docs) m.labels.push_back(d.label);
  m.d.assign(n * n, 0.0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const double v = js_distance(docs[i].theta.values(), docs[j].theta.values());
    m.d[i * n + j] = v;
    m.d[j * n + i] = v;
  });
  return m;
}

}  // namespace topictrace
