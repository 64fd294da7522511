#include "topictrace/topic_model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "topictrace/errors.hpp"
#include "topictrace/rng.hpp"

namespace topictrace {

void HyperParams::validate() const {
  if (num_topics < 1) throw InvalidArgument("K must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be > 0");
  if (train_iters < 1) throw InvalidArgument("train_iters must be >= 1");
}

TopicDistribution::TopicDistribution(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw InvalidDistribution("topic distribution is empty");
  double sum = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || !(v > 0.0))
      throw InvalidDistribution("topic distribution entries must be finite and > 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidDistribution("topic distribution sums to " + std::to_string(sum));
}

TopicDistribution TopicDistribution::normalized(std::vector<double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw InvalidDistribution("cannot normalize weights with sum " + std::to_string(sum));
  for (double& w : weights) w /= sum;
  return TopicDistribution(std::move(weights));
}

std::size_t TopicDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(p_.begin(), p_.end()) - p_.begin());
}

std::uint64_t TrainedModel::total_tokens() const {
  return std::accumulate(nk.begin(), nk.end(), std::uint64_t{0});
}

TopicDistribution TrainedModel::training_theta(std::size_t d) const {
  if (d >= num_docs()) throw InvalidArgument("document index out of range");
  return theta_from_counts(doc_topics(d), hp.alpha);
}

void TrainedModel::check_invariants() const {
  try {
    hp.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad hyperparameters: ") + e.what());
  }
  const std::size_t K = num_topics(), V = vocab_size(), D = num_docs();
  if (V == 0) throw FormatError("model vocabulary is empty");
  if (nkw.size() != K * V) throw FormatError("nkw must have K*V entries");
  if (nk.size() != K) throw FormatError("nk must have K entries");
  if (ndk.size() != D * K) throw FormatError("ndk must have D*K entries");
  std::uint64_t doc_total = 0;
  for (Count c : ndk) doc_total += c;
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = topic_words(k);
    if (std::accumulate(row.begin(), row.end(), std::uint64_t{0}) != nk[k])
      throw FormatError("nk[" + std::to_string(k) + "] differs from its nkw row sum");
  }
  if (doc_total != total_tokens()) throw FormatError("ndk and nk disagree on the token total");
}

void topic_conditional(std::span<const Count> nkw_col, std::span<const Count> nk,
                       std::span<const Count> ndk_row, double alpha, double beta,
                       std::size_t vocab_size, std::span<double> out) {
  assert(nkw_col.size() == nk.size() && ndk_row.size() == nk.size() && out.size() == nk.size());
  const double v_beta = static_cast<double>(vocab_size) * beta;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (ndk_row[k] + alpha) * (nkw_col[k] + beta) / (nk[k] + v_beta);
}

std::vector<double> topic_conditional(std::span<const Count> nkw_col, std::span<const Count> nk,
                                      std::span<const Count> ndk_row, const HyperParams& hp,
                                      std::size_t vocab_size) {
  if (nkw_col.size() != nk.size() || ndk_row.size() != nk.size())
    throw LengthMismatch("topic_conditional: count vectors differ in length");
  std::vector<double> out(nk.size());
  topic_conditional(nkw_col, nk, ndk_row, hp.alpha, hp.beta, vocab_size, out);
  return out;
}

TrainedModel train(std::span<const Document> docs, const Vocabulary& vocab, const HyperParams& hp,
                   const SweepCallback& on_sweep) {
  hp.validate();
  if (docs.empty()) throw EmptyCorpus("cannot train on an empty corpus");
  if (vocab.empty()) throw EmptyVocabulary("cannot train with an empty vocabulary");
  const std::size_t K = hp.num_topics, V = vocab.size(), D = docs.size();
  for (const auto& doc : docs) {
    if (doc.tokens.empty()) throw EmptyDocument("training document '" + doc.doc_id + "' is empty");
    for (WordId w : doc.tokens)
      if (w >= V) throw VocabMismatch("document '" + doc.doc_id + "' has token id >= V");
  }

  // Word-major during sampling so each token's K counts are contiguous.
  std::vector<Count> nwk(V * K, 0), nk(K, 0), ndk(D * K, 0);
  std::vector<std::vector<Count>> z(D);
  std::vector<Rng> rngs;
  rngs.reserve(D);
  for (std::size_t d = 0; d < D; ++d) {
    rngs.emplace_back(split_seed(hp.seed, d));
    z[d].resize(docs[d].tokens.size());
    for (std::size_t i = 0; i < z[d].size(); ++i) {
      const auto k = static_cast<Count>(rngs[d].below(K));
      z[d][i] = k;
      ++nwk[docs[d].tokens[i] * K + k];
      ++nk[k];
      ++ndk[d * K + k];
    }
  }

  std::vector<double> weights(K);
  const std::span<const Count> nk_view(nk);
  for (std::size_t sweep = 1; sweep <= hp.train_iters; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      const std::span<Count> ndk_row = std::span(ndk).subspan(d * K, K);
      const auto& tokens = docs[d].tokens;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::span<Count> nwk_col = std::span(nwk).subspan(tokens[i] * K, K);
        Count k = z[d][i];
        --nwk_col[k];
        --nk[k];
        --ndk_row[k];
        topic_conditional(nwk_col, nk_view, ndk_row, hp.alpha, hp.beta, V, weights);
        k = static_cast<Count>(rngs[d].categorical(weights));
        z[d][i] = k;
        ++nwk_col[k];
        ++nk[k];
        ++ndk_row[k];
      }
    }
#ifndef NDEBUG
    std::uint64_t total = 0, expected = 0;
    for (Count c : nk) total += c;
    for (const auto& doc : docs) expected += doc.tokens.size();
    assert(total == expected);
#endif
    if (on_sweep) on_sweep(sweep);
  }

  TrainedModel model;
  model.vocab = vocab;
  model.hp = hp;
  model.nkw.resize(K * V);
  for (std::size_t w = 0; w < V; ++w)
    for (std::size_t k = 0; k < K; ++k) model.nkw[k * V + w] = nwk[w * K + k];
  model.nk = std::move(nk);
  model.ndk = std::move(ndk);
  model.doc_ids.reserve(D);
  for (const auto& doc : docs) model.doc_ids.push_back(doc.doc_id);
  return model;
}

std::vector<double> phi(const TrainedModel& model, std::size_t k) {
  if (k >= model.num_topics())
    throw BadTopicId("topic " + std::to_string(k) + " out of range (K = " +
                     std::to_string(model.num_topics()) + ")");
  const std::size_t V = model.vocab_size();
  const double beta = model.hp.beta;
  const long double denom = model.nk[k] + static_cast<long double>(V) * beta;
  const auto row = model.topic_words(k);
  std::vector<double> out(V);
  for (std::size_t w = 0; w < V; ++w) out[w] = static_cast<double>((row[w] + beta) / denom);
  return out;
}

TopicDistribution theta_from_counts(std::span<const double> topic_counts, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgument("alpha must be > 0");
  const double n = std::accumulate(topic_counts.begin(), topic_counts.end(), 0.0);
  const double denom = n + static_cast<double>(topic_counts.size()) * alpha;
  std::vector<double> theta(topic_counts.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (topic_counts[k] < 0.0) throw InvalidArgument("topic counts must be non-negative");
    theta[k] = (topic_counts[k] + alpha) / denom;
  }
  return TopicDistribution(std::move(theta));
}

TopicDistribution theta_from_counts(std::span<const Count> topic_counts, double alpha) {
  std::vector<double> counts(topic_counts.begin(), topic_counts.end());
  return theta_from_counts(std::span<const double>(counts), alpha);
}

std::vector<std::pair<std::string, double>> top_words(const TrainedModel& model, std::size_t k,
                                                      std::size_t n) {
  const auto probs = phi(model, k);
  if (n < 1) throw InvalidArgument("top_words: n must be >= 1");
  n = std::min(n, probs.size());
  std::vector<WordId> ids(probs.size());
  std::iota(ids.begin(), ids.end(), WordId{0});
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](WordId a, WordId b) { return probs[a] != probs[b] ? probs[a] > probs[b] : a < b; });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(model.vocab.term(ids[i]), probs[ids[i]]);
  return out;
}

PhiTable::PhiTable(const TrainedModel& model)
    : num_topics_(model.num_topics()), vocab_size_(model.vocab_size()),
      numerators_(num_topics_ * vocab_size_), denominators_(num_topics_) {
  const double beta = model.hp.beta;
  for (std::size_t k = 0; k < num_topics_; ++k) {
    denominators_[k] = model.nk[k] + static_cast<long double>(vocab_size_) * beta;
    const auto row = model.topic_words(k);
    for (std::size_t w = 0; w < vocab_size_; ++w) numerators_[w * num_topics_ + k] = row[w] + beta;
  }
}

}  // namespace topictrace
