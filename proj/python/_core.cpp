#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "topictrace/clustering.hpp"
#include "topictrace/corpus.hpp"
#include "topictrace/divergence.hpp"
#include "topictrace/errors.hpp"
#include "topictrace/query_sampler.hpp"
#include "topictrace/serialize.hpp"
#include "topictrace/svg.hpp"
#include "topictrace/topic_model.hpp"
#include "topictrace/version.hpp"

namespace py = pybind11;
using namespace topictrace;

namespace {

std::vector<TopicDistribution> to_points(const std::vector<std::vector<double>>& rows) {
  std::vector<TopicDistribution> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.emplace_back(r);
  return out;
}

std::vector<double> as_list(const TopicDistribution& t) { return {t.values().begin(), t.values().end()}; }

TokenizerConfig rules_for(std::size_t min_len, const std::optional<std::vector<std::string>>& stoplist) {
  TokenizerConfig rules = TokenizerConfig::english_default();
  rules.min_len = min_len;
  if (stoplist) rules.stoplist = std::unordered_set<std::string>(stoplist->begin(), stoplist->end());
  return rules;
}

std::vector<DatedTheta> to_readings(const std::vector<std::tuple<std::vector<double>, std::string, double>>& rows) {
  std::vector<DatedTheta> out;
  for (const auto& [theta, date, weight] : rows) out.push_back({TopicDistribution(theta), Date::parse(date), weight});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LDA query sampling, ensemble clustering and divergence measures";
  m.attr("__version__") = std::string(kVersion);

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<std::vector<std::string>>(), py::arg("terms"))
      .def("__len__", &Vocabulary::size)
      .def("find", &Vocabulary::find, py::arg("term"))
      .def("term", [](const Vocabulary& v, WordId id) { return std::string(v.term(id)); }, py::arg("id"))
      .def_property_readonly("terms", [](const Vocabulary& v) { return v.terms(); });

  py::class_<Document>(m, "Document")
      .def(py::init([](std::string doc_id, std::vector<WordId> tokens, std::string title, std::string role,
                       std::string date) {
             return Document{std::move(doc_id), std::move(tokens),
                             {std::move(title), parse_role(role), Date::parse(date)}};
           }),
           py::arg("doc_id"), py::arg("tokens"), py::arg("title") = "", py::arg("role") = "reading",
           py::arg("date") = "1970-01-01")
      .def_readwrite("doc_id", &Document::doc_id)
      .def_readwrite("tokens", &Document::tokens)
      .def_property_readonly("title", [](const Document& d) { return d.meta.title; })
      .def_property_readonly("role", [](const Document& d) { return std::string(to_string(d.meta.role)); })
      .def_property_readonly("date", [](const Document& d) { return d.meta.date.iso(); });

  m.def("tokenize",
        [](std::string_view text, std::size_t min_len, const std::optional<std::vector<std::string>>& stoplist) {
          return tokenize(text, rules_for(min_len, stoplist));
        },
        py::arg("text"), py::arg("min_len") = 3, py::arg("stoplist") = py::none(),
        "Lowercased word tokens; the bundled English stoplist is used unless one is given.");
  m.def("default_stoplist", [] {
    const auto words = default_stoplist();
    return std::vector<std::string>(words.begin(), words.end());
  });
  m.def("build_vocabulary",
        [](const std::vector<std::vector<std::string>>& token_lists, std::size_t min_count) {
          return build_vocabulary(token_lists, min_count);
        },
        py::arg("token_lists"), py::arg("min_count") = 1);
  m.def("encode",
        [](const std::vector<std::string>& terms, const Vocabulary& vocab, std::string doc_id) {
          return encode(terms, vocab, std::move(doc_id), {});
        },
        py::arg("terms"), py::arg("vocab"), py::arg("doc_id"));

  py::class_<HyperParams>(m, "HyperParams")
      .def(py::init([](std::size_t K, double alpha, double beta, std::size_t iters, std::uint64_t seed) {
             HyperParams hp{K, alpha, beta, iters, seed};
             hp.validate();
             return hp;
           }),
           py::arg("num_topics") = 200, py::arg("alpha") = 0.1, py::arg("beta") = 0.01,
           py::arg("train_iters") = 1000, py::arg("seed") = 0)
      .def_readonly("num_topics", &HyperParams::num_topics)
      .def_readonly("alpha", &HyperParams::alpha)
      .def_readonly("beta", &HyperParams::beta)
      .def_readonly("train_iters", &HyperParams::train_iters)
      .def_readonly("seed", &HyperParams::seed);

  py::class_<TrainedModel>(m, "TrainedModel")
      .def_property_readonly("num_topics", &TrainedModel::num_topics)
      .def_property_readonly("vocab_size", &TrainedModel::vocab_size)
      .def_readonly("vocab", &TrainedModel::vocab)
      .def_readonly("hp", &TrainedModel::hp)
      .def_readonly("doc_ids", &TrainedModel::doc_ids)
      .def("phi", [](const TrainedModel& model, std::size_t k) { return phi(model, k); }, py::arg("k"))
      .def("training_theta", [](const TrainedModel& model, std::size_t d) { return as_list(model.training_theta(d)); },
           py::arg("d"))
      .def("top_words", [](const TrainedModel& model, std::size_t k, std::size_t n) { return top_words(model, k, n); },
           py::arg("k"), py::arg("n") = 10)
      .def("fingerprint", &model_fingerprint)
      .def("to_json", &model_to_json)
      .def_static("from_json", &model_from_json, py::arg("text"));

  m.def("train", [](const std::vector<Document>& docs, const Vocabulary& vocab, const HyperParams& hp) {
    py::gil_scoped_release release;
    return train(docs, vocab, hp);
  }, py::arg("docs"), py::arg("vocab"), py::arg("hp"));

  py::class_<QueryConfig>(m, "QueryConfig")
      .def(py::init([](std::size_t iters, double tail, std::uint64_t seed) {
             QueryConfig cfg{iters, tail, seed};
             cfg.validate();
             return cfg;
           }),
           py::arg("query_iters") = 200, py::arg("average_tail") = 0.2, py::arg("seed") = 0)
      .def_readonly("query_iters", &QueryConfig::query_iters)
      .def_readonly("average_tail", &QueryConfig::average_tail)
      .def_readonly("seed", &QueryConfig::seed);

  py::class_<QuerySample>(m, "QuerySample")
      .def_readonly("seed", &QuerySample::seed)
      .def_property_readonly("theta", [](const QuerySample& s) { return as_list(s.theta); })
      .def_readonly("perplexity", &QuerySample::perplexity);

  py::class_<SampleEnsemble>(m, "SampleEnsemble")
      .def_readonly("doc_id", &SampleEnsemble::doc_id)
      .def_readonly("model_fingerprint", &SampleEnsemble::model_fingerprint)
      .def_readonly("samples", &SampleEnsemble::samples)
      .def("__len__", [](const SampleEnsemble& e) { return e.samples.size(); })
      .def("thetas", [](const SampleEnsemble& e) {
        std::vector<std::vector<double>> out;
        for (const auto& s : e.samples) out.push_back(as_list(s.theta));
        return out;
      })
      .def("mean", [](const SampleEnsemble& e) { return as_list(ensemble_mean(e)); })
      .def("to_json", &ensemble_to_json)
      .def_static("from_json", &ensemble_from_json, py::arg("text"));

  m.def("query_sample", [](const TrainedModel& model, const Document& doc, const QueryConfig& cfg) {
    const auto r = query_sample(model, doc, cfg);
    return py::make_tuple(as_list(r.theta), r.perplexity);
  }, py::arg("model"), py::arg("doc"), py::arg("config") = QueryConfig{});
  m.def("sample_ensemble",
        [](const TrainedModel& model, const Document& doc, std::size_t S, const QueryConfig& cfg, unsigned threads) {
          py::gil_scoped_release release;
          return sample_ensemble(model, doc, S, cfg, threads);
        },
        py::arg("model"), py::arg("doc"), py::arg("samples") = 500, py::arg("config") = QueryConfig{},
        py::arg("threads") = 1);

  m.def("kl_bits", [](const std::vector<double>& p, const std::vector<double>& q) { return kl_bits(p, q); },
        py::arg("p"), py::arg("q"), "D(P||Q) in bits.");
  m.def("js_distance", [](const std::vector<double>& p, const std::vector<double>& q) { return js_distance(p, q); },
        py::arg("p"), py::arg("q"), "Jensen-Shannon distance, base 2.");
  m.def("perplexity",
        [](const Document& doc, const std::vector<double>& theta, const TrainedModel& model) {
          return perplexity(doc, theta, model);
        },
        py::arg("doc"), py::arg("theta"), py::arg("model"));

  py::class_<Clustering>(m, "Clustering")
      .def_readonly("k", &Clustering::k)
      .def_readonly("assignment", &Clustering::assignment)
      .def_property_readonly("centroids", [](const Clustering& c) {
        std::vector<std::vector<double>> out;
        for (const auto& t : c.centroids) out.push_back(as_list(t));
        return out;
      })
      .def_readonly("mean_silhouette", &Clustering::mean_silhouette)
      .def_readonly("wcss", &Clustering::wcss)
      .def_readonly("iterations", &Clustering::iterations)
      .def("sizes", &Clustering::sizes);

  m.def("kmeans",
        [](const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed) {
          return kmeans(to_points(points), k, seed);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0);
  m.def("silhouette",
        [](const std::vector<std::vector<double>>& points, const Clustering& c, const std::string& metric) {
          return silhouette(to_points(points), c, parse_metric(metric));
        },
        py::arg("points"), py::arg("clustering"), py::arg("metric") = "euclidean");
  m.def("select_k",
        [](const std::vector<std::vector<double>>& points, std::size_t k_min, std::size_t k_max,
           std::size_t restarts, std::uint64_t seed, const std::string& metric, unsigned threads) {
          const auto pts = to_points(points);
          py::gil_scoped_release release;
          return select_k(pts, {k_min, k_max, restarts, seed, parse_metric(metric), threads});
        },
        py::arg("points"), py::arg("k_min") = 2, py::arg("k_max") = 12, py::arg("restarts") = 10,
        py::arg("seed") = 0, py::arg("metric") = "euclidean", py::arg("threads") = 1);

  py::class_<ClusterReport>(m, "ClusterReport")
      .def_readonly("doc_id", &ClusterReport::doc_id)
      .def_readonly("k", &ClusterReport::k)
      .def_readonly("mean_silhouette", &ClusterReport::mean_silhouette)
      .def("to_json", &cluster_report_to_json)
      .def("to_csv", &cluster_report_to_csv)
      .def("violin_svg", &render_violin_svg);
  m.def("cluster_report", &cluster_report, py::arg("ensemble"), py::arg("clustering"), py::arg("model"),
        py::arg("n_top_words") = 10);

  m.def("cumulative_mixture",
        [](const std::vector<std::tuple<std::vector<double>, std::string, double>>& readings,
           const std::string& cutoff) {
          const auto mix = cumulative_mixture(to_readings(readings), Date::parse(cutoff));
          return py::make_tuple(as_list(mix.theta), mix.n_readings);
        },
        py::arg("readings"), py::arg("cutoff"),
        "readings: (theta, ISO date, weight) tuples. Returns (theta, n_readings).");

  py::class_<DivergenceTimeline>(m, "DivergenceTimeline")
      .def_readonly("target_doc_id", &DivergenceTimeline::target_doc_id)
      .def_property_readonly("points", [](const DivergenceTimeline& t) {
        std::vector<std::tuple<std::string, double, std::size_t>> out;
        for (const auto& p : t.points) out.emplace_back(p.snapshot_date.iso(), p.kl_bits, p.n_readings);
        return out;
      })
      .def("to_json", &timeline_to_json)
      .def("to_csv", &timeline_to_csv);
  m.def("divergence_timeline",
        [](std::string doc_id, const std::vector<double>& writing,
           const std::vector<std::tuple<std::vector<double>, std::string, double>>& readings,
           const std::vector<std::string>& snapshots, bool reverse) {
          std::vector<Date> dates;
          for (const auto& s : snapshots) dates.push_back(Date::parse(s));
          return divergence_timeline(std::move(doc_id), writing, to_readings(readings), dates,
                                     ThetaPolicy::ensemble_mean,
                                     reverse ? Direction::readings_given_writing : Direction::writing_given_readings);
        },
        py::arg("doc_id"), py::arg("writing_theta"), py::arg("readings"), py::arg("snapshots"),
        py::arg("reverse") = false);

  py::class_<DistanceMatrix>(m, "DistanceMatrix")
      .def_readonly("labels", &DistanceMatrix::labels)
      .def("__len__", &DistanceMatrix::size)
      .def("at", &DistanceMatrix::at, py::arg("i"), py::arg("j"))
      .def("to_json", &matrix_to_json)
      .def("to_csv", &matrix_to_csv)
      .def("heatmap_svg", &render_heatmap_svg);
  m.def("distance_matrix",
        [](const std::vector<std::string>& labels, const std::vector<std::vector<double>>& thetas,
           unsigned threads) {
          if (labels.size() != thetas.size()) throw LengthMismatch("labels and thetas differ in length");
          std::vector<LabeledTheta> docs;
          for (std::size_t i = 0; i < labels.size(); ++i) docs.push_back({labels[i], TopicDistribution(thetas[i])});
          return distance_matrix(docs, threads);
        },
        py::arg("labels"), py::arg("thetas"), py::arg("threads") = 1);
}
