#include "topictrace/query_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "topictrace/divergence.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/parallel.hpp"
#include "topictrace/rng.hpp"
#include "topictrace/serialize.hpp"

namespace topictrace {

void QueryConfig::validate() const {
  if (query_iters < 1) throw InvalidArgument("query_iters must be >= 1");
  if (!(average_tail > 0.0 && average_tail <= 1.0))
    throw InvalidArgument("average_tail must lie in (0, 1]");
}

std::size_t QueryConfig::tail_sweeps() const {
  const auto n = static_cast<std::size_t>(std::ceil(average_tail * static_cast<double>(query_iters)));
  return std::clamp<std::size_t>(n, 1, query_iters);
}

namespace {

// Read-only view of a model prepared for querying: word-major counts for the
// Gibbs kernel and the φ table for perplexity.
class FrozenModel {
 public:
  explicit FrozenModel(const TrainedModel& model)
      : model_(model), nwk_(model.vocab_size() * model.num_topics()), phi_(model) {
    const std::size_t K = model.num_topics(), V = model.vocab_size();
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t w = 0; w < V; ++w) nwk_[w * K + k] = model.nkw[k * V + w];
  }

  void check(const Document& doc) const {
    if (doc.tokens.empty()) throw EmptyDocument("query document '" + doc.doc_id + "' is empty");
    for (WordId w : doc.tokens)
      if (w >= model_.vocab_size())
        throw VocabMismatch("query document '" + doc.doc_id + "' has token id " +
                            std::to_string(w) + " >= V = " + std::to_string(model_.vocab_size()));
  }

  QueryResult run(const Document& doc, std::size_t iters, std::size_t tail,
                  std::uint64_t seed) const {
    const std::size_t K = model_.num_topics(), V = model_.vocab_size();
    const std::span<const Count> nk(model_.nk);
    Rng rng(seed);
    std::vector<Count> ndk(K, 0);
    std::vector<Count> z(doc.tokens.size());
    for (auto& k : z) {
      k = static_cast<Count>(rng.below(K));
      ++ndk[k];
    }
    std::vector<double> weights(K), tail_sum(K, 0.0);
    for (std::size_t sweep = 1; sweep <= iters; ++sweep) {
      for (std::size_t i = 0; i < z.size(); ++i) {
        const auto col = std::span<const Count>(nwk_).subspan(doc.tokens[i] * K, K);
        --ndk[z[i]];
        topic_conditional(col, nk, ndk, model_.hp.alpha, model_.hp.beta, V, weights);
        z[i] = static_cast<Count>(rng.categorical(weights));
        ++ndk[z[i]];
      }
      if (sweep + tail > iters)
        for (std::size_t k = 0; k < K; ++k) tail_sum[k] += ndk[k];
    }
    for (double& c : tail_sum) c /= static_cast<double>(tail);
    auto theta = theta_from_counts(std::span<const double>(tail_sum), model_.hp.alpha);
    const double ppl = perplexity(doc, theta.values(), phi_);
    return {std::move(theta), ppl};
  }

 private:
  const TrainedModel& model_;
  std::vector<Count> nwk_;
  PhiTable phi_;
};

}  // namespace

QueryResult query_sample(const TrainedModel& model, const Document& doc, const QueryConfig& cfg) {
  cfg.validate();
  FrozenModel frozen(model);
  frozen.check(doc);
  return frozen.run(doc, cfg.query_iters, cfg.tail_sweeps(), cfg.seed);
}

SampleEnsemble sample_ensemble(const TrainedModel& model, const Document& doc, std::size_t S,
                               const QueryConfig& cfg, unsigned threads) {
  cfg.validate();
  if (S < 1) throw InvalidArgument("ensemble size must be >= 1");
  FrozenModel frozen(model);
  frozen.check(doc);
  std::vector<std::optional<QuerySample>> slots(S);
  parallel_for(S, threads, [&](std::size_t i) {
    const std::uint64_t seed = split_seed(cfg.seed, i);
    auto r = frozen.run(doc, cfg.query_iters, cfg.tail_sweeps(), seed);
    slots[i] = QuerySample{seed, std::move(r.theta), r.perplexity};
  });
  SampleEnsemble ensemble{doc.doc_id, model_fingerprint(model), {}};
  ensemble.samples.reserve(S);
  for (auto& s : slots) ensemble.samples.push_back(std::move(*s));
  return ensemble;
}

TopicDistribution ensemble_mean(const SampleEnsemble& ensemble) {
  if (ensemble.samples.empty()) throw InvalidArgument("ensemble has no samples");
  const std::size_t K = ensemble.samples.front().theta.size();
  std::vector<double> sum(K, 0.0);
  for (const auto& s : ensemble.samples) {
    if (s.theta.size() != K) throw LengthMismatch("ensemble θ samples differ in length");
    for (std::size_t k = 0; k < K; ++k) sum[k] += s.theta[k];
  }
  return TopicDistribution::normalized(std::move(sum));
}

}  // namespace topictrace
