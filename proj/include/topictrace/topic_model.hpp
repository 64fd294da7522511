#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topictrace/corpus.hpp"

namespace topictrace {

struct HyperParams {
  std::size_t num_topics = 200;
  double alpha = 0.1;
  double beta = 0.01;
  std::size_t train_iters = 1000;
  std::uint64_t seed = 0;

  // Throws InvalidArgument.
  void validate() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// A point on the simplex with every entry strictly positive.
class TopicDistribution {
 public:
  // Throws InvalidDistribution unless all entries are finite and > 0 and the
  // sum is within 1e-9 of 1.
  explicit TopicDistribution(std::vector<double> p);
  // Divides positive weights by their sum.
  static TopicDistribution normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t k) const { return p_[k]; }
  std::span<const double> values() const noexcept { return p_; }
  operator std::span<const double>() const noexcept { return p_; }
  std::size_t argmax() const;  // lowest index on ties

  friend bool operator==(const TopicDistribution&, const TopicDistribution&) = default;

 private:
  std::vector<double> p_;
};

using Count = std::uint32_t;

// Count state of a finished Gibbs chain. Immutable by convention once trained.
struct TrainedModel {
  Vocabulary vocab;
  HyperParams hp;
  std::vector<Count> nkw;  // K x V, row-major
  std::vector<Count> nk;   // K
  std::vector<Count> ndk;  // D x K, row-major
  std::vector<std::string> doc_ids;

  std::size_t num_topics() const noexcept { return hp.num_topics; }
  std::size_t vocab_size() const noexcept { return vocab.size(); }
  std::size_t num_docs() const noexcept { return doc_ids.size(); }

  std::span<const Count> topic_words(std::size_t k) const {
    return std::span(nkw).subspan(k * vocab_size(), vocab_size());
  }
  std::span<const Count> doc_topics(std::size_t d) const {
    return std::span(ndk).subspan(d * num_topics(), num_topics());
  }
  std::uint64_t total_tokens() const;

  // Training θ of document d (from its final-sweep counts).
  TopicDistribution training_theta(std::size_t d) const;

  // Shape and count-conservation checks. Throws FormatError.
  void check_invariants() const;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

// Collapsed Gibbs full conditional for one token of word w:
//   out[k] = (ndk_row[k] + alpha) * (nkw_col[k] + beta) / (nk[k] + V * beta)
// The token must already be removed from all three count arrays.
void topic_conditional(std::span<const Count> nkw_col, std::span<const Count> nk,
                       std::span<const Count> ndk_row, double alpha, double beta,
                       std::size_t vocab_size, std::span<double> out);
std::vector<double> topic_conditional(std::span<const Count> nkw_col, std::span<const Count> nk,
                                      std::span<const Count> ndk_row, const HyperParams& hp,
                                      std::size_t vocab_size);

using SweepCallback = std::function<void(std::size_t sweep)>;

// Runs hp.train_iters collapsed Gibbs sweeps from a uniform random initial
// assignment. Document d draws from stream split_seed(hp.seed, d), so the
// result is a pure function of (docs, hp). Throws EmptyCorpus, EmptyDocument,
// VocabMismatch, InvalidArgument.
TrainedModel train(std::span<const Document> docs, const Vocabulary& vocab, const HyperParams& hp,
                   const SweepCallback& on_sweep = {});

// φ_k = (nkw[k] + β) / (nk[k] + Vβ). Throws BadTopicId.
std::vector<double> phi(const TrainedModel& model, std::size_t k);

// θ_k = (n_k + α) / (N + Kα); counts may be fractional (tail averages).
TopicDistribution theta_from_counts(std::span<const double> topic_counts, double alpha);
TopicDistribution theta_from_counts(std::span<const Count> topic_counts, double alpha);

// Highest-φ terms of topic k, ties by ascending word id; n is clamped to V.
std::vector<std::pair<std::string, double>> top_words(const TrainedModel& model, std::size_t k,
                                                      std::size_t n);

// φ for every (word, topic), stored word-major so that a token's K
// probabilities are contiguous.
// φ in word-major layout for evaluating mixtures Σ_k θ_k φ_{k,w}. Numerators
// n_kw + β are stored per word and the denominators n_k + Vβ per topic in
// extended precision, so no rounded φ enters the sum.
class PhiTable {
 public:
  explicit PhiTable(const TrainedModel& model);

  std::size_t num_topics() const noexcept { return num_topics_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::span<const double> numerators(WordId w) const {
    return std::span(numerators_).subspan(static_cast<std::size_t>(w) * num_topics_, num_topics_);
  }
  std::span<const long double> denominators() const noexcept { return denominators_; }
  double at(WordId w, std::size_t k) const {
    return static_cast<double>(numerators(w)[k] / denominators_[k]);
  }

 private:
  std::size_t num_topics_;
  std::size_t vocab_size_;
  std::vector<double> numerators_;
  std::vector<long double> denominators_;
};

}  // namespace topictrace
