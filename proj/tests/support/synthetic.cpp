#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace topictrace::testing {

double normal_draw(Rng& rng) {
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double u = 1.0 - rng.uniform();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal_draw(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

std::vector<double> dirichlet_draw(Rng& rng, std::span<const double> concentration) {
  std::vector<double> out(concentration.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::max(gamma_draw(rng, concentration[i]), 1e-300);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> symmetric_dirichlet_draw(Rng& rng, std::size_t dim, double concentration) {
  const std::vector<double> c(dim, concentration);
  return dirichlet_draw(rng, c);
}

std::string synthetic_word(std::size_t index) {
  std::string w = "w";
  std::string letters;
  for (int i = 0; i < 3 || index > 0; ++i) {
    letters.push_back(static_cast<char>('a' + index % 26));
    index /= 26;
  }
  std::reverse(letters.begin(), letters.end());
  return w + letters;
}

SyntheticCorpus make_lda_corpus(std::size_t K, std::size_t V, std::size_t D,
                                std::size_t tokens_per_doc, double topic_concentration,
                                double word_concentration, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticCorpus c;
  std::vector<std::string> terms;
  for (std::size_t w = 0; w < V; ++w) terms.push_back(synthetic_word(w));
  c.vocab = Vocabulary(terms);
  for (std::size_t k = 0; k < K; ++k) c.phi.push_back(symmetric_dirichlet_draw(rng, V, word_concentration));
  for (std::size_t d = 0; d < D; ++d) {
    c.theta.push_back(symmetric_dirichlet_draw(rng, K, topic_concentration));
    Document doc;
    doc.doc_id = "doc" + std::to_string(d);
    doc.meta = {"synthetic " + std::to_string(d), Role::reading, Date{1840 + static_cast<int>(d % 20), 1, 1}};
    for (std::size_t i = 0; i < tokens_per_doc; ++i) {
      const std::size_t z = rng.categorical(c.theta.back());
      doc.tokens.push_back(static_cast<WordId>(rng.categorical(c.phi[z])));
    }
    c.docs.push_back(std::move(doc));
  }
  return c;
}

SyntheticCorpus reference_corpus() { return make_lda_corpus(5, 200, 200, 100, 0.1, 0.05, 20180224); }

HyperParams reference_hyperparams() {
  HyperParams hp;
  hp.num_topics = 5;
  hp.alpha = 0.1;
  hp.beta = 0.01;
  hp.train_iters = 1000;
  hp.seed = 7;
  return hp;
}

PlantedEnsemble planted_modes(std::size_t modes, std::size_t per_mode, std::size_t K, double peak,
                              double concentration, std::uint64_t seed) {
  Rng rng(seed);
  PlantedEnsemble out;
  for (std::size_t m = 0; m < modes; ++m) {
    std::vector<double> center(K, (1.0 - peak) / static_cast<double>(K - 1));
    center[m] = peak;
    for (double& c : center) c *= concentration;
    for (std::size_t i = 0; i < per_mode; ++i) {
      out.points.push_back(TopicDistribution::normalized(dirichlet_draw(rng, center)));
      out.mode.push_back(m);
    }
  }
  return out;
}

double oracle_kl_bits(std::span<const double> p, std::span<const double> q) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += static_cast<long double>(p[i]) * std::log(static_cast<long double>(p[i]) / q[i]);
  return static_cast<double>(s / std::log(2.0L));
}

double oracle_js_distance(std::span<const double> p, std::span<const double> q) {
  auto entropy = [](auto&& values) {
    long double h = 0.0L;
    for (long double v : values)
      if (v > 0) h -= v * std::log(v);
    return h;
  };
  std::vector<long double> m(p.size()), lp(p.begin(), p.end()), lq(q.begin(), q.end());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = (lp[i] + lq[i]) / 2.0L;
  const long double js = (entropy(m) - (entropy(lp) + entropy(lq)) / 2.0L) / std::log(2.0L);
  return static_cast<double>(std::sqrt(std::max(0.0L, js)));
}

double greedy_matched_js(const std::vector<std::vector<double>>& truth,
                         const std::vector<std::vector<double>>& recovered) {
  std::vector<bool> used(recovered.size(), false);
  double total = 0.0;
  for (const auto& t : truth) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t pick = 0;
    for (std::size_t r = 0; r < recovered.size(); ++r) {
      if (used[r]) continue;
      const double d = oracle_js_distance(t, recovered[r]);
      if (d < best) {
        best = d;
        pick = r;
      }
    }
    used[pick] = true;
    total += best;
  }
  return total / static_cast<double>(truth.size());
}

double best_permutation_js(const std::vector<std::vector<double>>& truth,
                           const std::vector<std::vector<double>>& recovered) {
  std::vector<std::size_t> perm(recovered.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) total += oracle_js_distance(truth[k], recovered[perm[k]]);
    best = std::min(best, total / static_cast<double>(truth.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::size_t> brute_force_two_partition(std::span<const TopicDistribution> points) {
  const std::size_t n = points.size(), dim = points.front().size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_assign;
  // Point 0 always in cluster 0 to skip mirrored partitions.
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<std::size_t> assign(n, 0);
    for (std::size_t i = 1; i < n; ++i) assign[i] = (mask >> (i - 1)) & 1;
    std::vector<double> mean0(dim, 0.0), mean1(dim, 0.0);
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      auto& m = assign[i] ? mean1 : mean0;
      (assign[i] ? n1 : n0)++;
      for (std::size_t j = 0; j < dim; ++j) m[j] += points[i][j];
    }
    if (n1 == 0) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      mean0[j] /= static_cast<double>(n0);
      mean1[j] /= static_cast<double>(n1);
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& m = assign[i] ? mean1 : mean0;
      for (std::size_t j = 0; j < dim; ++j) ss += (points[i][j] - m[j]) * (points[i][j] - m[j]);
    }
    if (ss < best) {
      best = ss;
      best_assign = assign;
    }
  }
  return best_assign;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}


std::filesystem::path write_text_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir / "texts");
  std::ofstream manifest(dir / "manifest.csv", std::ios::binary);
  manifest << "doc_id,path,title,role,date\n";
  for (const auto& doc : corpus.docs) {
    std::ofstream text(dir / "texts" / (doc.doc_id + ".txt"), std::ios::binary);
    for (std::size_t i = 0; i < doc.tokens.size(); ++i)
      text << (i ? (i % 12 == 0 ? "\n" : " ") : "") << corpus.vocab.term(doc.tokens[i]);
    text << "\n";
    manifest << doc.doc_id << ",texts/" << doc.doc_id << ".txt,\"" << doc.meta.title << "\","
             << to_string(doc.meta.role) << ',' << doc.meta.date.iso() << "\n";
  }
  return dir / "manifest.csv";
}

std::filesystem::path fresh_temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("topictrace_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

bool balanced_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = text.find('<', i)) != std::string::npos) {
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    stack.push_back(tag.substr(0, tag.find_first_of(" \t\n")));
  }
  return stack.empty();
}

}  // namespace topictrace::testing
