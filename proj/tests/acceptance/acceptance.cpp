// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "synthetic.hpp"
#include "topictrace/clustering.hpp"
#include "topictrace/divergence.hpp"
#include "topictrace/query_sampler.hpp"
#include "topictrace/serialize.hpp"
#include "topictrace/topic_model.hpp"

using namespace topictrace;
using namespace topictrace::testing;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kOracleTol = 1e-12;
constexpr double kTriangleSlack = 1e-12;
constexpr double kWitnessForward = 0.20751874963942185;  // 0.5 log2 2 + 0.5 log2(2/3)
constexpr double kWitnessReverse = 0.18872187554086717;  // 0.25 log2 0.5 + 0.75 log2 1.5
constexpr double kRecoveryMaxJs = 0.25;
constexpr double kConsistencyMaxMedianJs = 0.15;
constexpr double kSingleTokenMaxTv = 0.02;
constexpr double kClusterMinRate = 0.90;
constexpr double kBudgetDivergence = 5.0;
constexpr double kBudgetRecovery = 300.0;
constexpr double kBudgetConsistency = 60.0;
constexpr double kBudgetClusters = 120.0;

struct Outcome {
  bool pass;
  std::string detail;
};

const TrainedModel& reference_model() {
  static const TrainedModel m = [] {
    const auto c = reference_corpus();
    return train(c.docs, c.vocab, reference_hyperparams());
  }();
  return m;
}

std::vector<double> random_simplex(Rng& rng, std::size_t dim) {
  return symmetric_dirichlet_draw(rng, dim, 1.0);
}

std::vector<double> normalize(std::vector<double> v) {
  double s = 0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
  return v;
}

// 1 --------------------------------------------------------------------------
Outcome divergence_oracles() {
  Rng rng(split_seed(1001, 0));
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t dim = 2 + rng.below(49);
    const auto p = random_simplex(rng, dim);
    const auto q = random_simplex(rng, dim);
    worst = std::max({worst, std::abs(kl_bits(p, q) - oracle_kl_bits(p, q)),
                      std::abs(kl_bits(q, p) - oracle_kl_bits(q, p)),
                      std::abs(js_distance(p, q) - oracle_js_distance(p, q))});
  }
  const std::vector<double> P{0.5, 0.5}, Q{0.25, 0.75};
  const double fwd = kl_bits(P, Q), rev = kl_bits(Q, P);
  const bool witness = std::abs(fwd - kWitnessForward) <= kOracleTol &&
                       std::abs(rev - kWitnessReverse) <= kOracleTol && fwd != rev;

  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 2 + rng.below(19);
    const auto a = random_simplex(rng, dim), b = random_simplex(rng, dim), c = random_simplex(rng, dim);
    const double ab = js_distance(a, b), bc = js_distance(b, c), ac = js_distance(a, c);
    if (ac > ab + bc + kTriangleSlack || ab > ac + bc + kTriangleSlack || bc > ab + ac + kTriangleSlack)
      ++violations;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "max oracle error %.2e, witness %.15f vs %.15f, triangle violations %zu/1000",
                worst, fwd, rev, violations);
  return {worst <= kOracleTol && witness && violations == 0, buf};
}

// 2 --------------------------------------------------------------------------
Outcome topic_recovery() {
  const auto c = reference_corpus();
  const auto& m = reference_model();
  std::vector<std::vector<double>> recovered;
  for (std::size_t k = 0; k < m.num_topics(); ++k) recovered.push_back(phi(m, k));
  const double greedy = greedy_matched_js(c.phi, recovered);
  const double best = best_permutation_js(c.phi, recovered);
  char buf[160];
  std::snprintf(buf, sizeof buf, "greedy matched mean JS %.4f (best permutation %.4f), limit %.2f", greedy, best,
                kRecoveryMaxJs);
  return {greedy <= kRecoveryMaxJs, buf};
}

// 3 --------------------------------------------------------------------------
Outcome query_consistency() {
  const auto c = reference_corpus();
  const auto& m = reference_model();
  double worst = 0;
  std::string per_doc;
  for (std::size_t d : {0u, 50u, 100u, 150u, 199u}) {
    QueryConfig cfg;
    cfg.seed = 300 + d;
    const auto e = sample_ensemble(m, c.docs[d], 25, cfg);
    const auto truth = m.training_theta(d);
    std::vector<double> js;
    for (const auto& s : e.samples) js.push_back(js_distance(s.theta.values(), truth.values()));
    const double med = median(js);
    worst = std::max(worst, med);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s%s=%.4f", per_doc.empty() ? "" : " ", c.docs[d].doc_id.c_str(), med);
    per_doc += buf;
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "; worst median JS %.4f over 25 seeds, limit %.2f", worst,
                kConsistencyMaxMedianJs);
  return {worst <= kConsistencyMaxMedianJs, "median JS " + per_doc + buf};
}

// 4 --------------------------------------------------------------------------
Outcome single_token() {
  const auto& m = reference_model();
  const std::size_t K = m.num_topics();
  const std::vector<Count> empty(K, 0);
  auto conditional = [&](WordId w) {
    std::vector<Count> col(K);
    for (std::size_t k = 0; k < K; ++k) col[k] = m.topic_words(k)[w];
    auto weights = topic_conditional(col, m.nk, empty, m.hp, m.vocab_size());
    return normalize(std::vector<double>(weights.begin(), weights.end()));
  };
  // The most frequent word plus the word whose conditional is most spread out.
  WordId spread = 0;
  double best_entropy = -1;
  for (WordId w = 0; w < m.vocab_size(); ++w) {
    double h = 0;
    for (double p : conditional(w)) h -= p * std::log2(p);
    if (h > best_entropy) best_entropy = h, spread = w;
  }
  double worst = 0;
  std::string detail;
  for (WordId w : {WordId{0}, spread}) {
    const auto target = conditional(w);
    // 50 sweeps; θ read from the final state only.
    const auto e = sample_ensemble(m, Document{"one", {w}, {}}, 10000, {50, 0.01, 4000 + w});
    std::vector<double> freq(K, 0.0);
    for (const auto& s : e.samples) freq[s.theta.argmax()] += 1.0;
    double tv = 0;
    for (std::size_t k = 0; k < K; ++k) tv += std::abs(freq[k] / 10000.0 - target[k]) / 2;
    worst = std::max(worst, tv);
    char buf[60];
    std::snprintf(buf, sizeof buf, "%sword %u TV %.4f", detail.empty() ? "" : ", ", w, tv);
    detail += buf;
  }
  return {worst <= kSingleTokenMaxTv, detail + " over 10000 seeds, limit 0.02"};
}

// 5 --------------------------------------------------------------------------
Outcome cluster_detection() {
  std::string detail;
  bool pass = true;
  for (std::size_t planted : {2u, 8u}) {
    std::size_t hits = 0;
    for (std::uint64_t meta = 0; meta < 20; ++meta) {
      const auto ens = planted_modes(planted, 25, 20, 0.6, 200.0, split_seed(5000 + planted, meta));
      SelectKOptions opt;
      opt.seed = meta;
      if (select_k(ens.points, opt).k == planted) ++hits;
    }
    const double rate = hits / 20.0;
    pass = pass && rate >= kClusterMinRate;
    char buf[60];
    std::snprintf(buf, sizeof buf, "%sk=%zu found in %zu/20", detail.empty() ? "" : ", ", planted, hits);
    detail += buf;
  }
  return {pass, detail + " meta-seeds, need >= 90%"};
}

// 6 --------------------------------------------------------------------------
std::vector<Date> year_ends(int from, int to) {
  std::vector<Date> out;
  for (int y = from; y <= to; ++y) out.push_back({y, 12, 31});
  return out;
}

Outcome timeline_patterns() {
  const std::size_t K = 10;
  std::size_t near_far_ok = 0, decreasing_ok = 0;
  const std::size_t trials = 20;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(split_seed(6000, t));
    // Readings scatter around a center that favours topics 0..4.
    std::vector<double> center(K, 0.02);
    for (std::size_t k = 0; k < 5; ++k) center[k] = 0.18;
    std::vector<DatedTheta> readings;
    for (int i = 0; i < 24; ++i) {
      std::vector<double> conc(K);
      for (std::size_t k = 0; k < K; ++k) conc[k] = 50.0 * center[k];
      readings.push_back({TopicDistribution::normalized(dirichlet_draw(rng, conc)),
                          Date{1840 + i / 2, i % 2 ? 7u : 1u, 1}});
    }
    std::vector<double> near_conc(K), far_conc(K);
    for (std::size_t k = 0; k < K; ++k) {
      near_conc[k] = 100.0 * center[k];
      far_conc[k] = k >= 5 ? 18.0 : 0.2;
    }
    const auto a = TopicDistribution::normalized(dirichlet_draw(rng, near_conc));
    const auto b = TopicDistribution::normalized(dirichlet_draw(rng, far_conc));
    const auto snaps = year_ends(1840, 1851);
    const auto ta = divergence_timeline("A", a.values(), readings, snaps);
    const auto tb = divergence_timeline("B", b.values(), readings, snaps);
    bool above = true;
    for (std::size_t i = 0; i < snaps.size(); ++i) above = above && tb.points[i].kl_bits > ta.points[i].kl_bits;
    near_far_ok += above;

    // Readings drifting from a distant start toward the writing.
    const auto w = TopicDistribution::normalized(symmetric_dirichlet_draw(rng, K, 1.0));
    const auto start = TopicDistribution::normalized(symmetric_dirichlet_draw(rng, K, 1.0));
    std::vector<DatedTheta> converging;
    for (int i = 0; i < 12; ++i) {
      const double lambda = (i + 1) / 13.0;
      std::vector<double> mix(K);
      for (std::size_t k = 0; k < K; ++k) mix[k] = (1 - lambda) * start[k] + lambda * w[k];
      converging.push_back({TopicDistribution::normalized(mix), Date{1840 + i, 3, 1}});
    }
    const auto tc = divergence_timeline("W", w.values(), converging, snaps);
    bool decreasing = true;
    for (std::size_t i = 1; i < tc.points.size(); ++i)
      decreasing = decreasing && tc.points[i].kl_bits < tc.points[i - 1].kl_bits;
    decreasing_ok += decreasing;
  }

  // Through the model: readings are the training documents, the writings are
  // generated from the readings' average mixture (A) and from their rarest
  // topic (B), then query-sampled.
  const auto c = reference_corpus();
  const auto& m = reference_model();
  std::vector<DatedTheta> readings;
  std::vector<double> avg(m.num_topics(), 0.0);
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    readings.push_back({m.training_theta(d), Date{1830 + static_cast<int>(d % 20), static_cast<unsigned>(1 + d % 12), 1}});
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += c.theta[d][k] / c.docs.size();
  }
  const std::size_t rare = std::min_element(avg.begin(), avg.end()) - avg.begin();
  std::vector<double> far_theta(avg.size(), 0.0);
  far_theta[rare] = 1.0;
  Rng rng(6999);
  auto generate = [&](const std::vector<double>& theta, const std::string& id) {
    Document doc{id, {}, {}};
    for (int i = 0; i < 200; ++i) {
      const std::size_t k = rng.categorical(std::span<const double>(theta));
      doc.tokens.push_back(static_cast<WordId>(rng.categorical(std::span<const double>(c.phi[k]))));
    }
    return doc;
  };
  const auto doc_a = generate(avg, "A"), doc_b = generate(far_theta, "B");
  QueryConfig cfg;
  cfg.seed = 66;
  const auto mean_a = ensemble_mean(sample_ensemble(m, doc_a, 50, cfg));
  const auto mean_b = ensemble_mean(sample_ensemble(m, doc_b, 50, cfg));
  const auto snaps = year_ends(1830, 1849);
  const auto ta = divergence_timeline("A", mean_a.values(), readings, snaps);
  const auto tb = divergence_timeline("B", mean_b.values(), readings, snaps);
  bool model_above = true;
  for (std::size_t i = 0; i < snaps.size(); ++i)
    model_above = model_above && tb.points[i].kl_bits > ta.points[i].kl_bits;

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "far above near at every snapshot %zu/%zu, strictly decreasing %zu/%zu, sampled writings %s",
                near_far_ok, trials, decreasing_ok, trials, model_above ? "ordered" : "NOT ordered");
  return {near_far_ok == trials && decreasing_ok == trials && model_above, buf};
}

// 7 --------------------------------------------------------------------------
bool matrix_well_formed(const DistanceMatrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.at(i, i) != 0.0) return false;
    for (std::size_t j = 0; j < m.size(); ++j)
      if (m.at(i, j) != m.at(j, i)) return false;
  }
  return true;
}

Outcome matrix_patterns() {
  const std::size_t K = 10, trials = 20;
  std::size_t ordered = 0, well_formed = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(split_seed(7000, t));
    const auto base = symmetric_dirichlet_draw(rng, K, 1.0);
    std::vector<double> conc(K);
    for (std::size_t k = 0; k < K; ++k) conc[k] = 300.0 * base[k] + 0.01;
    const auto far_base = symmetric_dirichlet_draw(rng, K, 1.0);
    std::vector<LabeledTheta> docs{{"first", TopicDistribution::normalized(dirichlet_draw(rng, conc))},
                                   {"second", TopicDistribution::normalized(dirichlet_draw(rng, conc))},
                                   {"third", TopicDistribution::normalized(std::vector<double>(far_base))}};
    const auto m = distance_matrix(docs);
    const auto m4 = distance_matrix(docs, 4);
    ordered += m.at(0, 1) < m.at(0, 2) && m.at(0, 1) < m.at(1, 2);
    well_formed += matrix_well_formed(m) && m.d == m4.d;
  }

  // Sampled: two documents drawn from one mixture and one from another.
  const auto c = reference_corpus();
  const auto& model = reference_model();
  Rng rng(7999);
  auto generate = [&](std::size_t source, const std::string& id) {
    Document doc{id, {}, {}};
    for (int i = 0; i < 200; ++i) {
      const std::size_t k = rng.categorical(std::span<const double>(c.theta[source]));
      doc.tokens.push_back(static_cast<WordId>(rng.categorical(std::span<const double>(c.phi[k]))));
    }
    return doc;
  };
  // Pick two training mixtures that are far apart.
  std::size_t far = 1;
  for (std::size_t d = 1; d < c.docs.size(); ++d)
    if (js_distance(c.theta[0], c.theta[d]) > js_distance(c.theta[0], c.theta[far])) far = d;
  QueryConfig cfg;
  cfg.seed = 77;
  std::vector<LabeledTheta> sampled;
  for (auto [source, id] : {std::pair{std::size_t{0}, "near1"}, {std::size_t{0}, "near2"}, {far, "far"}})
    sampled.push_back({id, ensemble_mean(sample_ensemble(model, generate(source, id), 50, cfg))});
  const auto ms = distance_matrix(sampled);
  const bool sampled_ok = ms.at(0, 1) < ms.at(0, 2) && ms.at(0, 1) < ms.at(1, 2) && matrix_well_formed(ms);

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "near pair closest %zu/%zu, symmetric zero-diagonal thread-stable %zu/%zu, sampled triple %s "
                "(%.4f < %.4f, %.4f)",
                ordered, trials, well_formed, trials, sampled_ok ? "ordered" : "NOT ordered", ms.at(0, 1),
                ms.at(0, 2), ms.at(1, 2));
  return {ordered == trials && well_formed == trials && sampled_ok, buf};
}

// 8 --------------------------------------------------------------------------
Outcome perplexity_checks() {
  std::size_t exact = 0, total = 0;
  Rng rng(8000);
  for (std::size_t V : {2u, 7u, 200u, 1000u, 4096u, 30011u}) {
    for (std::size_t K : {1u, 5u, 200u}) {
      TrainedModel m;
      std::vector<std::string> terms;
      for (std::size_t w = 0; w < V; ++w) terms.push_back("t" + std::to_string(w));
      m.vocab = Vocabulary(terms);
      m.hp.num_topics = K;
      m.nkw.assign(K * V, 0);
      m.nk.assign(K, 0);
      Document doc{"d", {}, {}};
      for (int i = 0; i < 500; ++i) doc.tokens.push_back(static_cast<WordId>(rng.below(V)));
      const auto theta = TopicDistribution::normalized(symmetric_dirichlet_draw(rng, K, 0.5));
      ++total;
      exact += perplexity(doc, theta.values(), m) == static_cast<double>(V);
    }
  }

  const auto c = reference_corpus();
  const auto& m = reference_model();
  const PhiTable table(m);
  std::vector<TopicDistribution> thetas;
  for (std::size_t d = 0; d < c.docs.size(); ++d) thetas.push_back(m.training_theta(d));
  std::size_t increased = 0;
  double matched_sum = 0, mismatched_sum = 0;
  for (std::size_t d = 0; d < c.docs.size(); ++d) {
    std::size_t other = d == 0 ? 1 : 0;
    for (std::size_t e = 0; e < c.docs.size(); ++e)
      if (e != d && js_distance(thetas[d].values(), thetas[e].values()) >
                        js_distance(thetas[d].values(), thetas[other].values()))
        other = e;
    const double matched = perplexity(c.docs[d], thetas[d].values(), table);
    const double mismatched = perplexity(c.docs[d], thetas[other].values(), table);
    matched_sum += matched;
    mismatched_sum += mismatched;
    increased += mismatched > matched;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "uniform model exactly V in %zu/%zu cases; mismatched > matched for %zu/%zu documents "
                "(mean %.1f vs %.1f)",
                exact, total, increased, c.docs.size(), mismatched_sum / c.docs.size(),
                matched_sum / c.docs.size());
  return {exact == total && increased == c.docs.size(), buf};
}

// 9 --------------------------------------------------------------------------
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), dir).string()] = read_file(entry.path());
  return files;
}

bool run_pipeline(const fs::path& manifest, const fs::path& out, const std::string& threads, std::string& log) {
  const std::string o = out.string();
  const std::vector<std::vector<std::string>> steps{
      {"ingest", "--manifest", manifest.string()},
      {"train", "--corpus", o + "/corpus.json", "-K", "6", "--iters", "150"},
      {"query", "--model", o + "/model.json", "--corpus", o + "/corpus.json", "--doc-id", "doc60", "-S", "60",
       "--iters", "60"},
      {"query", "--model", o + "/model.json", "--corpus", o + "/corpus.json", "--doc-id", "doc61", "-S", "60",
       "--iters", "60"},
      {"query", "--model", o + "/model.json", "--corpus", o + "/corpus.json", "--doc-id", "doc62", "-S", "60",
       "--iters", "60"},
      {"cluster", "--ensemble", o + "/ensemble_doc60.json", "--model", o + "/model.json", "--k-max", "6",
       "--svg"},
      {"timeline", "--model", o + "/model.json", "--writing", o + "/ensemble_doc60.json", "--readings",
       manifest.string(), "--snapshots", "monthly"},
      {"timeline", "--model", o + "/model.json", "--writing", o + "/ensemble_doc61.json", "--readings",
       o + "/corpus.json", "--policy", "largest-cluster-centroid", "--reverse"},
      {"compare", "--model", o + "/model.json", "--ensembles", o + "/ensemble_doc60.json",
       o + "/ensemble_doc61.json", o + "/ensemble_doc62.json", "--svg"},
  };
  for (const auto& step : steps) {
    std::vector<std::string> args{"topictrace", "--seed", "2024", "--threads", threads, "--output-dir", o};
    args.insert(args.end(), step.begin(), step.end());
    std::ostringstream out_s, err_s;
    if (cli::run(args, out_s, err_s) != cli::kExitOk) {
      log = step[0] + " failed: " + err_s.str();
      return false;
    }
  }
  return true;
}

Outcome cli_determinism() {
  const auto dir = fresh_temp_dir("acceptance_determinism");
  auto corpus = make_lda_corpus(6, 150, 63, 80, 0.2, 0.05, 909);
  for (std::size_t d = 60; d < 63; ++d) {
    corpus.docs[d].meta.role = Role::writing;
    corpus.docs[d].meta.date = {1862, 6, 1};
  }
  const auto manifest = write_text_corpus(dir / "in", corpus);
  const auto out = dir / "out";

  std::vector<std::map<std::string, std::string>> runs;
  for (const char* threads : {"1", "4", "1", "3"}) {
    fs::remove_all(out);
    std::string log;
    if (!run_pipeline(manifest, out, threads, log)) return {false, log};
    runs.push_back(snapshot(out));
  }
  std::size_t mismatched = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].size() != runs[0].size()) ++mismatched;
    for (const auto& [name, bytes] : runs[0]) {
      auto it = runs[r].find(name);
      if (it == runs[r].end() || it->second != bytes) ++mismatched;
    }
  }
  fs::remove_all(dir);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu output files compared across 4 runs (threads 1,4,1,3), %zu differences",
                runs[0].size(), mismatched);
  return {mismatched == 0 && runs[0].size() >= 12, buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;  // 0: no runtime limit
  };
  const std::vector<Criterion> criteria{
      {1, "divergence oracles", divergence_oracles, kBudgetDivergence},
      {2, "topic recovery", topic_recovery, kBudgetRecovery},
      {3, "query consistency", query_consistency, kBudgetConsistency},
      {4, "single-token exactness", single_token, 0},
      {5, "cluster detection", cluster_detection, kBudgetClusters},
      {6, "timeline pattern", timeline_patterns, 0},
      {7, "distance matrix pattern", matrix_patterns, 0},
      {8, "perplexity exactness", perplexity_checks, 0},
      {9, "end-to-end determinism", cli_determinism, 0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over runtime budget";
    }
    failures += !o.pass;
    std::printf("criterion %d %-24s %s  %s (%.2f s)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
