#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topictrace/corpus.hpp"
#include "topictrace/topic_model.hpp"

namespace topictrace {

struct QueryConfig {
  std::size_t query_iters = 200;
  // Fraction of the final sweeps whose topic counts are averaged into θ.
  double average_tail = 0.2;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidArgument
  std::size_t tail_sweeps() const;
};

struct QueryResult {
  TopicDistribution theta;
  double perplexity;
};

struct QuerySample {
  std::uint64_t seed = 0;
  TopicDistribution theta;
  double perplexity = 0.0;

  friend bool operator==(const QuerySample&, const QuerySample&) = default;
};

struct SampleEnsemble {
  std::string doc_id;
  std::string model_fingerprint;
  std::vector<QuerySample> samples;

  friend bool operator==(const SampleEnsemble&, const SampleEnsemble&) = default;
};

// Gibbs sampling of one held-out document with the model's topic-word counts
// frozen: only the document's own topic counts change. Throws EmptyDocument,
// VocabMismatch, InvalidArgument.
QueryResult query_sample(const TrainedModel& model, const Document& doc, const QueryConfig& cfg);

// S runs; run i uses seed split_seed(cfg.seed, i). Output is independent of
// `threads`.
SampleEnsemble sample_ensemble(const TrainedModel& model, const Document& doc, std::size_t S,
                               const QueryConfig& cfg, unsigned threads = 1);

// Renormalized mean of the ensemble's θ samples.
TopicDistribution ensemble_mean(const SampleEnsemble& ensemble);

}  // namespace topictrace
