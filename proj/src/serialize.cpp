#include "topictrace/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "topictrace/errors.hpp"

namespace topictrace {

using Json = nlohmann::ordered_json;

namespace {

Json parse_versioned(std::string_view text, std::string_view what) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string(what) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("format_version"))
    throw FormatError(std::string(what) + ": missing format_version");
  if (j["format_version"] != kFormatVersion)
    throw FormatError(std::string(what) + ": unsupported format_version " +
                      j["format_version"].dump());
  return j;
}

// Wraps nlohmann's type/key errors so every malformed file surfaces as FormatError.
template <class Fn>
auto guarded(std::string_view what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const InvalidDistribution& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  } catch (const BadDate& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Json theta_json(const TopicDistribution& t) { return Json(std::vector<double>(t.values().begin(), t.values().end())); }

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string format_csv_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

// ---------------------------------------------------------------------------

std::string corpus_to_json(const Corpus& corpus) {
  Json docs = Json::array();
  for (const auto& d : corpus.documents) {
    docs.push_back({{"doc_id", d.doc_id},
                    {"tokens", d.tokens},
                    {"meta",
                     {{"title", d.meta.title},
                      {"role", std::string(to_string(d.meta.role))},
                      {"date", d.meta.date.iso()}}}});
  }
  Json j{{"format_version", kFormatVersion},
         {"vocabulary", corpus.vocabulary.terms()},
         {"documents", std::move(docs)}};
  return j.dump() + "\n";
}

Corpus corpus_from_json(std::string_view text) {
  const Json j = parse_versioned(text, "corpus");
  return guarded("corpus", [&] {
    Corpus c;
    c.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    for (const auto& d : j.at("documents")) {
      Document doc;
      doc.doc_id = d.at("doc_id").get<std::string>();
      doc.tokens = d.at("tokens").get<std::vector<WordId>>();
      const auto& m = d.at("meta");
      doc.meta = {m.at("title").get<std::string>(), parse_role(m.at("role").get<std::string>()),
                  Date::parse(m.at("date").get<std::string>())};
      for (WordId w : doc.tokens)
        if (w >= c.vocabulary.size())
          throw FormatError("corpus: document '" + doc.doc_id + "' has token id >= V");
      c.documents.push_back(std::move(doc));
    }
    return c;
  });
}

std::string model_to_json(const TrainedModel& model) {
  const auto& hp = model.hp;
  Json j{{"format_version", kFormatVersion},
         {"hyperparams",
          {{"K", hp.num_topics},
           {"alpha", hp.alpha},
           {"beta", hp.beta},
           {"train_iters", hp.train_iters},
           {"seed", hp.seed}}},
         {"vocabulary", model.vocab.terms()},
         {"nkw", model.nkw},
         {"nk", model.nk},
         {"ndk", model.ndk},
         {"doc_ids", model.doc_ids},
         {"seed", hp.seed}};
  return j.dump() + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  const Json j = parse_versioned(text, "model");
  auto model = guarded("model", [&] {
    TrainedModel m;
    const auto& hp = j.at("hyperparams");
    m.hp.num_topics = hp.at("K").get<std::size_t>();
    m.hp.alpha = hp.at("alpha").get<double>();
    m.hp.beta = hp.at("beta").get<double>();
    m.hp.train_iters = hp.at("train_iters").get<std::size_t>();
    m.hp.seed = hp.at("seed").get<std::uint64_t>();
    m.vocab = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    m.nkw = j.at("nkw").get<std::vector<Count>>();
    m.nk = j.at("nk").get<std::vector<Count>>();
    m.ndk = j.at("ndk").get<std::vector<Count>>();
    m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
    if (j.at("seed").get<std::uint64_t>() != m.hp.seed)
      throw FormatError("model: top-level seed differs from hyperparams.seed");
    return m;
  });
  model.check_invariants();
  return model;
}

std::string model_fingerprint(const TrainedModel& model) {
  return hex64(fnv1a64(model_to_json(model)));
}

std::string ensemble_to_json(const SampleEnsemble& ensemble) {
  Json samples = Json::array();
  for (const auto& s : ensemble.samples)
    samples.push_back({{"seed", s.seed}, {"theta", theta_json(s.theta)}, {"perplexity", s.perplexity}});
  Json j{{"format_version", kFormatVersion},
         {"doc_id", ensemble.doc_id},
         {"model_fingerprint", ensemble.model_fingerprint},
         {"samples", std::move(samples)}};
  return j.dump() + "\n";
}

SampleEnsemble ensemble_from_json(std::string_view text) {
  const Json j = parse_versioned(text, "ensemble");
  return guarded("ensemble", [&] {
    SampleEnsemble e;
    e.doc_id = j.at("doc_id").get<std::string>();
    e.model_fingerprint = j.at("model_fingerprint").get<std::string>();
    for (const auto& s : j.at("samples"))
      e.samples.push_back({s.at("seed").get<std::uint64_t>(),
                           TopicDistribution(s.at("theta").get<std::vector<double>>()),
                           s.at("perplexity").get<double>()});
    if (e.samples.empty()) throw FormatError("ensemble: no samples");
    return e;
  });
}

std::string cluster_report_to_json(const ClusterReport& report) {
  Json clusters = Json::array();
  for (std::size_t c = 0; c < report.clusters.size(); ++c) {
    const auto& s = report.clusters[c];
    Json words = Json::array();
    for (const auto& [term, p] : s.top_words) words.push_back({{"term", term}, {"probability", p}});
    clusters.push_back({{"cluster", c},
                        {"size", s.size},
                        {"dominant_topic", s.dominant_topic},
                        {"top_words", std::move(words)},
                        {"perplexity",
                         {{"min", s.perplexity.min},
                          {"q1", s.perplexity.q1},
                          {"median", s.perplexity.median},
                          {"q3", s.perplexity.q3},
                          {"max", s.perplexity.max},
                          {"values", s.perplexity.values}}}});
  }
  Json j{{"format_version", kFormatVersion},
         {"doc_id", report.doc_id},
         {"k", report.k},
         {"mean_silhouette", report.mean_silhouette ? Json(*report.mean_silhouette) : Json(nullptr)},
         {"clusters", std::move(clusters)}};
  return j.dump(2) + "\n";
}

std::string cluster_report_to_csv(const ClusterReport& report) {
  std::string out = "cluster,size,dominant_topic,median_perplexity,q1,q3,min,max\n";
  for (std::size_t c = 0; c < report.clusters.size(); ++c) {
    const auto& s = report.clusters[c];
    const auto& p = s.perplexity;
    out += std::to_string(c) + ',' + std::to_string(s.size) + ',' + std::to_string(s.dominant_topic) +
           ',' + format_csv_number(p.median) + ',' + format_csv_number(p.q1) + ',' +
           format_csv_number(p.q3) + ',' + format_csv_number(p.min) + ',' +
           format_csv_number(p.max) + '\n';
  }
  return out;
}

std::string timeline_to_json(const DivergenceTimeline& timeline) {
  Json points = Json::array();
  for (const auto& p : timeline.points)
    points.push_back({{"snapshot_date", p.snapshot_date.iso()},
                      {"n_readings", p.n_readings},
                      {"kl_bits", p.kl_bits}});
  Json j{{"format_version", kFormatVersion},
         {"target_doc_id", timeline.target_doc_id},
         {"representative_theta_policy", std::string(to_string(timeline.representative_theta_policy))},
         {"direction", std::string(to_string(timeline.direction))},
         {"points", std::move(points)}};
  return j.dump(2) + "\n";
}

std::string timeline_to_csv(const DivergenceTimeline& timeline) {
  std::string out = "snapshot_date,n_readings,kl_bits\n";
  for (const auto& p : timeline.points)
    out += p.snapshot_date.iso() + ',' + std::to_string(p.n_readings) + ',' +
           format_csv_number(p.kl_bits) + '\n';
  return out;
}

std::string matrix_to_json(const DistanceMatrix& matrix) {
  const std::size_t n = matrix.size();
  Json rows = Json::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(matrix.d.begin() + static_cast<std::ptrdiff_t>(i * n),
                            matrix.d.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
    rows.push_back(std::move(row));
  }
  Json j{{"format_version", kFormatVersion}, {"labels", matrix.labels}, {"d", std::move(rows)}};
  return j.dump(2) + "\n";
}

std::string matrix_to_csv(const DistanceMatrix& matrix) {
  std::string out = "doc_id";
  for (const auto& l : matrix.labels) out += ',' + csv_field(l);
  out += '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    out += csv_field(matrix.labels[i]);
    for (std::size_t j = 0; j < matrix.size(); ++j) out += ',' + format_csv_number(matrix.at(i, j));
    out += '\n';
  }
  return out;
}

}  // namespace topictrace
