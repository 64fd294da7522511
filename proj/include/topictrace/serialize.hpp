#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "topictrace/clustering.hpp"
#include "topictrace/corpus.hpp"
#include "topictrace/divergence.hpp"
#include "topictrace/query_sampler.hpp"
#include "topictrace/topic_model.hpp"

// JSON and CSV persistence. Every JSON document carries `format_version`;
// loaders reject other versions and malformed content with FormatError.
namespace topictrace {

inline constexpr int kFormatVersion = 1;

std::string read_file(const std::filesystem::path& path);  // throws MissingFile
void write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(std::string_view text);

// Integer counts only, so a save/load cycle is exact.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view text);
// FNV-1a 64 of model_to_json(model), as 16 hex digits.
std::string model_fingerprint(const TrainedModel& model);

std::string ensemble_to_json(const SampleEnsemble& ensemble);
SampleEnsemble ensemble_from_json(std::string_view text);

std::string cluster_report_to_json(const ClusterReport& report);
// cluster,size,dominant_topic,median_perplexity,q1,q3,min,max
std::string cluster_report_to_csv(const ClusterReport& report);

std::string timeline_to_json(const DivergenceTimeline& timeline);
// snapshot_date,n_readings,kl_bits
std::string timeline_to_csv(const DivergenceTimeline& timeline);

std::string matrix_to_json(const DistanceMatrix& matrix);
// Square table with doc ids as header row and first column.
std::string matrix_to_csv(const DistanceMatrix& matrix);

// 12 significant digits, as used in every CSV output.
std::string format_csv_number(double value);

}  // namespace topictrace
