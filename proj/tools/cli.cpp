#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "topictrace/clustering.hpp"
#include "topictrace/corpus.hpp"
#include "topictrace/divergence.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/query_sampler.hpp"
#include "topictrace/serialize.hpp"
#include "topictrace/svg.hpp"
#include "topictrace/topic_model.hpp"
#include "topictrace/version.hpp"

namespace topictrace::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Global {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string output_dir = ".";
  std::string format = "both";

  bool csv() const { return format != "json"; }
  bool json() const { return format != "csv"; }
};

struct IngestOpts {
  std::string manifest, stoplist;
  std::size_t min_count = 1, min_len = 3;
};

struct TrainOpts {
  std::string corpus;
  std::size_t topics = 200, iters = 1000;
  double alpha = 0.1, beta = 0.01;
};

struct QueryOpts {
  std::string model, corpus, doc_id, path, stoplist, date;
  std::size_t samples = 500, iters = 200, min_len = 3;
  double tail = 0.2;
};

struct ClusterOpts {
  std::string ensemble, model, metric = "euclidean";
  std::size_t k_min = 2, k_max = 12, restarts = 10, top_words = 10;
  bool svg = false;
};

struct TimelineOpts {
  std::string model, writing, readings, snapshots = "yearly", policy = "ensemble-mean",
      weight = "docs", until;
  std::vector<std::string> dates;
  bool reverse = false;
};

struct CompareOpts {
  std::string model, policy = "ensemble-mean";
  std::vector<std::string> ensembles;
  bool svg = false;
};

std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ? c : '_');
  return out.empty() ? "doc" : out;
}

std::string fingerprint_file(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

// Records one subcommand's configuration and input fingerprints. The file
// holds one entry per subcommand so a shared output directory keeps the whole
// pipeline; thread count is left out because it never changes results.
void write_run_manifest(const Global& g, const std::string& subcommand, Json config,
                        const std::vector<std::string>& inputs) {
  const fs::path path = fs::path(g.output_dir) / "run_manifest.json";
  Json manifest;
  if (fs::exists(path)) {
    try {
      manifest = Json::parse(read_file(path));
    } catch (const Json::exception&) {
      manifest = Json();
    }
  }
  if (!manifest.is_object() || !manifest.contains("runs")) {
    manifest = Json{{"format_version", kFormatVersion},
                    {"tool", "topictrace"},
                    {"version", std::string(kVersion)},
                    {"runs", Json::object()}};
  }
  Json fingerprints = Json::object();
  for (const auto& in : inputs) fingerprints[in] = fingerprint_file(in);
  config["seed"] = g.seed;
  config["output_dir"] = g.output_dir;
  config["format"] = g.format;
  manifest["version"] = std::string(kVersion);
  manifest["runs"][subcommand] = Json{{"config", std::move(config)}, {"inputs", std::move(fingerprints)}};
  write_file(path, manifest.dump(2) + "\n");
}

TokenizerConfig tokenizer_rules(const std::string& stoplist, std::size_t min_len) {
  TokenizerConfig rules = TokenizerConfig::english_default();
  if (!stoplist.empty()) rules.stoplist = load_stoplist(stoplist);
  rules.min_len = min_len;
  return rules;
}

void check_fingerprint(const SampleEnsemble& e, const TrainedModel& model, const std::string& path) {
  if (e.model_fingerprint != model_fingerprint(model))
    throw VocabMismatch("ensemble " + path + " was sampled from a different model");
}

// ---------------------------------------------------------------------------

void cmd_ingest(const Global& g, const IngestOpts& o, std::ostream& out) {
  const auto manifest = load_manifest(o.manifest);
  const auto rules = tokenizer_rules(o.stoplist, o.min_len);
  const auto corpus = ingest(manifest, rules, o.min_count, g.threads);
  write_file(fs::path(g.output_dir) / "corpus.json", corpus_to_json(corpus));

  std::vector<std::string> inputs{o.manifest};
  if (!o.stoplist.empty()) inputs.push_back(o.stoplist);
  for (const auto& e : manifest.entries) inputs.push_back(e.path.string());
  write_run_manifest(g, "ingest",
                     {{"manifest", o.manifest},
                      {"stoplist", o.stoplist.empty() ? Json("bundled") : Json(o.stoplist)},
                      {"min_count", o.min_count},
                      {"min_len", o.min_len}},
                     inputs);
  out << corpus.documents.size() << " documents, " << corpus.vocabulary.size() << " terms, "
      << corpus.total_tokens() << " tokens\n";
}

void cmd_train(const Global& g, const TrainOpts& o, std::ostream& out) {
  const auto corpus = corpus_from_json(read_file(o.corpus));
  const auto readings = corpus.with_role(Role::reading);
  HyperParams hp{o.topics, o.alpha, o.beta, o.iters, g.seed};
  const auto model = train(readings, corpus.vocabulary, hp, [&](std::size_t sweep) {
    if (sweep % 100 == 0 || sweep == hp.train_iters)
      out << "sweep " << sweep << "/" << hp.train_iters << "\n";
  });
  write_file(fs::path(g.output_dir) / "model.json", model_to_json(model));
  write_run_manifest(g, "train",
                     {{"corpus", o.corpus},
                      {"K", o.topics},
                      {"alpha", o.alpha},
                      {"beta", o.beta},
                      {"iters", o.iters}},
                     {o.corpus});
  out << "trained K=" << hp.num_topics << " on " << readings.size() << " readings, fingerprint "
      << model_fingerprint(model) << "\n";
}

void cmd_query(const Global& g, const QueryOpts& o, std::ostream& out) {
  const auto model = model_from_json(read_file(o.model));
  Document doc;
  std::vector<std::string> inputs{o.model};
  if (!o.path.empty()) {
    const auto terms = tokenize(read_file(o.path), tokenizer_rules(o.stoplist, o.min_len));
    DocumentMeta meta{o.doc_id, Role::writing, o.date.empty() ? Date{} : Date::parse(o.date)};
    doc = encode(terms, model.vocab, o.doc_id.empty() ? fs::path(o.path).stem().string() : o.doc_id,
                 std::move(meta));
    inputs.push_back(o.path);
    if (!o.stoplist.empty()) inputs.push_back(o.stoplist);
  } else {
    if (o.corpus.empty() || o.doc_id.empty())
      throw InvalidArgument("query needs --path, or --corpus with --doc-id");
    const auto corpus = corpus_from_json(read_file(o.corpus));
    if (!(corpus.vocabulary == model.vocab))
      throw VocabMismatch("corpus vocabulary differs from the model vocabulary");
    const Document* found = corpus.find(o.doc_id);
    if (!found) throw InvalidArgument("doc_id '" + o.doc_id + "' not in " + o.corpus);
    doc = *found;
    inputs.push_back(o.corpus);
  }
  QueryConfig cfg{o.iters, o.tail, g.seed};
  const auto ensemble = sample_ensemble(model, doc, o.samples, cfg, g.threads);
  const fs::path file = fs::path(g.output_dir) / ("ensemble_" + safe_name(doc.doc_id) + ".json");
  write_file(file, ensemble_to_json(ensemble));
  write_run_manifest(g, "query",
                     {{"model", o.model},
                      {"corpus", o.corpus},
                      {"doc_id", o.doc_id},
                      {"path", o.path},
                      {"samples", o.samples},
                      {"iters", o.iters},
                      {"tail", o.tail},
                      {"min_len", o.min_len},
                      {"date", o.date}},
                     inputs);
  out << "wrote " << ensemble.samples.size() << " samples for '" << doc.doc_id << "' to "
      << file.string() << "\n";
}

void cmd_cluster(const Global& g, const ClusterOpts& o, std::ostream& out, std::ostream& err) {
  const auto model = model_from_json(read_file(o.model));
  const auto ensemble = ensemble_from_json(read_file(o.ensemble));
  check_fingerprint(ensemble, model, o.ensemble);
  const auto points = thetas(ensemble);
  const std::size_t distinct = count_distinct(points);
  Clustering clustering;
  if (distinct < 2 || distinct < o.k_min) {
    err << "warning: only " << distinct << " distinct samples; reporting a single cluster\n";
    clustering = kmeans(points, 1, g.seed);
  } else {
    SelectKOptions opts{o.k_min, o.k_max, o.restarts, g.seed, parse_metric(o.metric), g.threads};
    if (opts.k_max > distinct) {
      err << "warning: k_max lowered to " << distinct << " (distinct samples)\n";
      opts.k_max = distinct;
    }
    clustering = select_k(points, opts);
  }
  const auto report = cluster_report(ensemble, clustering, model, o.top_words);
  const std::string stem = "cluster_" + safe_name(ensemble.doc_id);
  const fs::path dir(g.output_dir);
  if (g.json()) write_file(dir / (stem + ".json"), cluster_report_to_json(report));
  if (g.csv()) write_file(dir / (stem + ".csv"), cluster_report_to_csv(report));
  if (o.svg) write_file(dir / (stem + ".svg"), render_violin_svg(report));
  write_run_manifest(g, "cluster",
                     {{"ensemble", o.ensemble},
                      {"model", o.model},
                      {"k_min", o.k_min},
                      {"k_max", o.k_max},
                      {"restarts", o.restarts},
                      {"metric", o.metric},
                      {"top_words", o.top_words},
                      {"svg", o.svg}},
                     {o.ensemble, o.model});
  out << "k=" << report.k;
  if (report.mean_silhouette) out << " mean_silhouette=" << format_csv_number(*report.mean_silhouette);
  out << "\n";
  if (report.mean_silhouette && *report.mean_silhouette < 0.25)
    err << "warning: mean silhouette below 0.25; no clear cluster structure\n";
}

struct ReadingDates {
  std::map<std::string, Date> reading;
  std::map<std::string, Date> any;
};

ReadingDates reading_dates(const std::string& source) {
  ReadingDates dates;
  if (fs::path(source).extension() == ".json") {
    const auto corpus = corpus_from_json(read_file(source));
    for (const auto& d : corpus.documents) {
      dates.any[d.doc_id] = d.meta.date;
      if (d.meta.role == Role::reading) dates.reading[d.doc_id] = d.meta.date;
    }
  } else {
    const auto manifest = load_manifest(source);
    for (const auto& e : manifest.entries) {
      dates.any[e.doc_id] = e.date;
      if (e.role == Role::reading) dates.reading[e.doc_id] = e.date;
    }
  }
  return dates;
}

std::vector<Date> make_snapshots(const TimelineOpts& o, Date first, Date last) {
  std::vector<Date> snaps;
  if (!o.dates.empty()) {
    for (const auto& s : o.dates) snaps.push_back(Date::parse(s));
    return snaps;
  }
  if (o.snapshots == "yearly") {
    for (int y = first.year; y <= last.year; ++y) snaps.push_back({y, 12, 31});
  } else if (o.snapshots == "monthly") {
    for (Date d{first.year, first.month, 1}; d <= last; d = d.next_month_start())
      snaps.push_back(d.last_of_month());
  } else {
    throw InvalidArgument("--snapshots must be monthly or yearly (or pass --dates)");
  }
  return snaps;
}

void cmd_timeline(const Global& g, const TimelineOpts& o, std::ostream& out) {
  const auto model = model_from_json(read_file(o.model));
  const auto ensemble = ensemble_from_json(read_file(o.writing));
  check_fingerprint(ensemble, model, o.writing);
  const auto policy = parse_theta_policy(o.policy);
  const auto theta = representative_theta(ensemble, policy, SelectKOptions{.seed = g.seed, .threads = g.threads});
  if (o.weight != "docs" && o.weight != "tokens") throw InvalidArgument("--weight must be docs or tokens");

  const auto dates = reading_dates(o.readings);
  std::vector<DatedTheta> readings;
  for (std::size_t d = 0; d < model.num_docs(); ++d) {
    auto it = dates.reading.find(model.doc_ids[d]);
    if (it == dates.reading.end()) continue;
    const auto counts = model.doc_topics(d);
    double weight = 1.0;
    if (o.weight == "tokens") {
      weight = 0.0;
      for (Count c : counts) weight += c;
    }
    readings.push_back({model.training_theta(d), it->second, weight});
  }
  if (readings.empty()) throw NoReadingsYet("no model training document has a reading date in " + o.readings);
  Date first = readings.front().date, last = readings.front().date;
  for (const auto& r : readings) {
    first = std::min(first, r.date);
    last = std::max(last, r.date);
  }
  if (auto it = dates.any.find(ensemble.doc_id); it != dates.any.end()) last = std::max(last, it->second);
  if (!o.until.empty()) last = std::max(last, Date::parse(o.until));

  const auto snaps = make_snapshots(o, first, last);
  const auto direction = o.reverse ? Direction::readings_given_writing : Direction::writing_given_readings;
  const auto timeline = divergence_timeline(ensemble.doc_id, theta.values(), readings, snaps, policy, direction);

  const std::string stem = std::string(o.reverse ? "timeline_reverse_" : "timeline_") + safe_name(ensemble.doc_id);
  const fs::path dir(g.output_dir);
  if (g.json()) write_file(dir / (stem + ".json"), timeline_to_json(timeline));
  if (g.csv()) write_file(dir / (stem + ".csv"), timeline_to_csv(timeline));
  write_run_manifest(g, o.reverse ? "timeline_reverse" : "timeline",
                     {{"model", o.model},
                      {"writing", o.writing},
                      {"readings", o.readings},
                      {"snapshots", o.snapshots},
                      {"dates", o.dates},
                      {"until", o.until},
                      {"policy", o.policy},
                      {"weight", o.weight},
                      {"reverse", o.reverse}},
                     {o.model, o.writing, o.readings});
  out << timeline.points.size() << " snapshots, direction " << to_string(direction) << "\n";
}

void cmd_compare(const Global& g, const CompareOpts& o, std::ostream& out) {
  const auto model = model_from_json(read_file(o.model));
  const auto policy = parse_theta_policy(o.policy);
  std::vector<LabeledTheta> docs;
  for (const auto& path : o.ensembles) {
    const auto e = ensemble_from_json(read_file(path));
    check_fingerprint(e, model, path);
    docs.push_back({e.doc_id, representative_theta(e, policy, SelectKOptions{.seed = g.seed, .threads = g.threads})});
  }
  const auto matrix = distance_matrix(docs, g.threads);
  const fs::path dir(g.output_dir);
  if (g.json()) write_file(dir / "distance_matrix.json", matrix_to_json(matrix));
  if (g.csv()) write_file(dir / "distance_matrix.csv", matrix_to_csv(matrix));
  if (o.svg) write_file(dir / "distance_matrix.svg", render_heatmap_svg(matrix));
  std::vector<std::string> inputs{o.model};
  inputs.insert(inputs.end(), o.ensembles.begin(), o.ensembles.end());
  write_run_manifest(g, "compare",
                     {{"model", o.model}, {"ensembles", o.ensembles}, {"policy", o.policy}, {"svg", o.svg}},
                     inputs);
  out << matrix.size() << "x" << matrix.size() << " distance matrix\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Topic-model query sampling and divergence analysis of dated corpora", "topictrace"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "Directory for all outputs")->capture_default_str();
  app.add_option("--format", g.format, "Tabular outputs to write")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();

  IngestOpts io;
  auto* ingest_cmd = app.add_subcommand("ingest", "Tokenize and encode the documents of a manifest");
  ingest_cmd->add_option("--manifest", io.manifest, "CSV manifest")->required();
  ingest_cmd->add_option("--stoplist", io.stoplist, "Stoplist file (default: bundled English list)");
  ingest_cmd->add_option("--min-count", io.min_count, "Minimum reading-corpus frequency")
      ->check(CLI::PositiveNumber)->capture_default_str();
  ingest_cmd->add_option("--min-len", io.min_len, "Minimum token length")->capture_default_str();

  TrainOpts to;
  auto* train_cmd = app.add_subcommand("train", "Train the topic model on the readings");
  train_cmd->add_option("--corpus", to.corpus, "Encoded corpus JSON")->required();
  train_cmd->add_option("-K,--topics", to.topics, "Number of topics")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--alpha", to.alpha, "Document-topic concentration")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--beta", to.beta, "Topic-word concentration")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--iters", to.iters, "Gibbs sweeps")->check(CLI::PositiveNumber)->capture_default_str();

  QueryOpts qo;
  auto* query_cmd = app.add_subcommand("query", "Query-sample a document against a trained model");
  query_cmd->add_option("--model", qo.model, "Model JSON")->required();
  query_cmd->add_option("--corpus", qo.corpus, "Encoded corpus containing --doc-id");
  query_cmd->add_option("--doc-id", qo.doc_id, "Document id");
  query_cmd->add_option("--path", qo.path, "Plain-text document to tokenize and query");
  query_cmd->add_option("--stoplist", qo.stoplist, "Stoplist for --path");
  query_cmd->add_option("--min-len", qo.min_len, "Minimum token length for --path")->capture_default_str();
  query_cmd->add_option("--date", qo.date, "Date recorded for --path documents");
  query_cmd->add_option("-S,--samples", qo.samples, "Ensemble size")->check(CLI::PositiveNumber)->capture_default_str();
  query_cmd->add_option("--iters", qo.iters, "Sweeps per run")->check(CLI::PositiveNumber)->capture_default_str();
  query_cmd->add_option("--tail", qo.tail, "Fraction of final sweeps averaged into theta")
      ->check(CLI::Range(1e-9, 1.0))->capture_default_str();

  ClusterOpts co;
  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster an ensemble and report per-cluster perplexity");
  cluster_cmd->add_option("--ensemble", co.ensemble, "Ensemble JSON")->required();
  cluster_cmd->add_option("--model", co.model, "Model JSON")->required();
  cluster_cmd->add_option("--k-min", co.k_min, "Smallest cluster count")->check(CLI::Range(2, 1000000))->capture_default_str();
  cluster_cmd->add_option("--k-max", co.k_max, "Largest cluster count")->check(CLI::Range(2, 1000000))->capture_default_str();
  cluster_cmd->add_option("--restarts", co.restarts, "k-means restarts per k")->check(CLI::PositiveNumber)->capture_default_str();
  cluster_cmd->add_option("--metric", co.metric, "Silhouette distance")
      ->check(CLI::IsMember({"euclidean", "jsd"}))->capture_default_str();
  cluster_cmd->add_option("--top-words", co.top_words, "Words listed per cluster")->check(CLI::PositiveNumber)->capture_default_str();
  cluster_cmd->add_flag("--svg", co.svg, "Also write a violin plot");

  TimelineOpts tlo;
  auto* timeline_cmd = app.add_subcommand("timeline", "KL divergence of a writing from the readings to date");
  timeline_cmd->add_option("--model", tlo.model, "Model JSON")->required();
  timeline_cmd->add_option("--writing", tlo.writing, "Ensemble JSON of the writing")->required();
  timeline_cmd->add_option("--readings", tlo.readings, "Manifest CSV or corpus JSON giving reading dates")->required();
  timeline_cmd->add_option("--snapshots", tlo.snapshots, "monthly or yearly")
      ->check(CLI::IsMember({"monthly", "yearly"}))->capture_default_str();
  timeline_cmd->add_option("--dates", tlo.dates, "Explicit snapshot dates")->delimiter(',');
  timeline_cmd->add_option("--until", tlo.until, "Extend generated snapshots to this date");
  timeline_cmd->add_option("--policy", tlo.policy, "Representative theta")
      ->check(CLI::IsMember({"ensemble-mean", "largest-cluster-centroid"}))->capture_default_str();
  timeline_cmd->add_option("--weight", tlo.weight, "Readings mixture weighting")
      ->check(CLI::IsMember({"docs", "tokens"}))->capture_default_str();
  timeline_cmd->add_flag("--reverse", tlo.reverse, "Emit D(readings||writing) instead");

  CompareOpts cmo;
  auto* compare_cmd = app.add_subcommand("compare", "Pairwise Jensen-Shannon distances between documents");
  compare_cmd->add_option("--model", cmo.model, "Model JSON")->required();
  compare_cmd->add_option("--ensembles", cmo.ensembles, "Ensemble JSON files")->required()->expected(2, -1);
  compare_cmd->add_option("--policy", cmo.policy, "Representative theta")
      ->check(CLI::IsMember({"ensemble-mean", "largest-cluster-centroid"}))->capture_default_str();
  compare_cmd->add_flag("--svg", cmo.svg, "Also write a heatmap");

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*ingest_cmd) cmd_ingest(g, io, out);
    else if (*train_cmd) cmd_train(g, to, out);
    else if (*query_cmd) cmd_query(g, qo, out);
    else if (*cluster_cmd) cmd_cluster(g, co, out, err);
    else if (*timeline_cmd) cmd_timeline(g, tlo, out);
    else if (*compare_cmd) cmd_compare(g, cmo, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace topictrace::cli
