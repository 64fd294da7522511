#include "topictrace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace topictrace {
namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

constexpr int kHistogramBins = 20;

}  // namespace

std::string render_violin_svg(const ClusterReport& report) {
  const double slot = 100.0, plot_h = 320.0, top = 40.0, left = 60.0;
  const double width = left + slot * static_cast<double>(std::max<std::size_t>(report.clusters.size(), 1)) + 20.0;
  const double height = top + plot_h + 60.0;

  double lo = 0.0, hi = 1.0;
  bool first = true;
  for (const auto& c : report.clusters) {
    lo = first ? c.perplexity.min : std::min(lo, c.perplexity.min);
    hi = first ? c.perplexity.max : std::max(hi, c.perplexity.max);
    first = false;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto y_of = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  // Bin counts share one scale so violin area tracks cluster size.
  std::vector<std::vector<double>> hist(report.clusters.size(), std::vector<double>(kHistogramBins, 0.0));
  double max_count = 1.0;
  for (std::size_t c = 0; c < report.clusters.size(); ++c) {
    for (double v : report.clusters[c].perplexity.values) {
      auto b = static_cast<int>((v - lo) / (hi - lo) * kHistogramBins);
      b = std::clamp(b, 0, kHistogramBins - 1);
      hist[c][static_cast<std::size_t>(b)] += 1.0;
    }
    max_count = std::max(max_count, *std::max_element(hist[c].begin(), hist[c].end()));
  }

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<title>Perplexity by cluster: " + escape(report.doc_id) + "</title>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
       num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    s += "<text x=\"" + num(left - 4) + "\" y=\"" + num(y_of(v) + 4) + "\" text-anchor=\"end\">" +
         num(v) + "</text>\n";
  }
  s += "<text x=\"14\" y=\"" + num(top + plot_h / 2) + "\" transform=\"rotate(-90 14 " +
       num(top + plot_h / 2) + ")\" text-anchor=\"middle\">perplexity</text>\n";

  for (std::size_t c = 0; c < report.clusters.size(); ++c) {
    const auto& cl = report.clusters[c];
    const double cx = left + slot * (static_cast<double>(c) + 0.5);
    const double half = slot * 0.45;
    std::string right, leftside;
    for (int b = 0; b < kHistogramBins; ++b) {
      const double w = half * hist[c][static_cast<std::size_t>(b)] / max_count;
      const double y0 = y_of(lo + (hi - lo) * b / kHistogramBins);
      const double y1 = y_of(lo + (hi - lo) * (b + 1) / kHistogramBins);
      right += num(cx + w) + "," + num(y0) + " " + num(cx + w) + "," + num(y1) + " ";
      leftside = num(cx - w) + "," + num(y1) + " " + num(cx - w) + "," + num(y0) + " " + leftside;
    }
    s += "<polygon points=\"" + right + leftside + "\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n";
    s += "<rect x=\"" + num(cx - 4) + "\" y=\"" + num(y_of(cl.perplexity.q3)) +
         "\" width=\"8\" height=\"" + num(y_of(cl.perplexity.q1) - y_of(cl.perplexity.q3)) +
         "\" fill=\"#444\"/>\n";
    s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(y_of(cl.perplexity.max)) + "\" x2=\"" + num(cx) +
         "\" y2=\"" + num(y_of(cl.perplexity.min)) + "\" stroke=\"#444\"/>\n";
    s += "<line x1=\"" + num(cx - half) + "\" y1=\"" + num(y_of(cl.perplexity.median)) + "\" x2=\"" +
         num(cx + half) + "\" y2=\"" + num(y_of(cl.perplexity.median)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(cx) + "\" y=\"" + num(top + plot_h + 18) + "\" text-anchor=\"middle\">T" +
         std::to_string(cl.dominant_topic) + "</text>\n";
    s += "<text x=\"" + num(cx) + "\" y=\"" + num(top + plot_h + 34) + "\" text-anchor=\"middle\">n=" +
         std::to_string(cl.size) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string render_heatmap_svg(const DistanceMatrix& matrix) {
  const std::size_t n = matrix.size();
  const double cell = 48.0;
  std::size_t longest = 1;
  for (const auto& l : matrix.labels) longest = std::max(longest, l.size());
  const double margin = 12.0 + 7.0 * static_cast<double>(std::min<std::size_t>(longest, 40));
  const double size = margin + cell * static_cast<double>(n) + 10.0;

  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(size) + "\" height=\"" + num(size) +
       "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<title>Jensen-Shannon distance</title>\n";
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = margin + cell * (static_cast<double>(i) + 0.5);
    s += "<text x=\"" + num(margin - 4) + "\" y=\"" + num(pos + 4) + "\" text-anchor=\"end\">" +
         escape(matrix.labels[i]) + "</text>\n";
    s += "<text x=\"" + num(pos) + "\" y=\"" + num(margin - 4) + "\" transform=\"rotate(-45 " +
         num(pos) + " " + num(margin - 4) + ")\">" + escape(matrix.labels[i]) + "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = std::clamp(matrix.at(i, j), 0.0, 1.0);
      const int r = static_cast<int>(std::lround(255 - 247 * v));
      const int g = static_cast<int>(std::lround(255 - 207 * v));
      const int b = static_cast<int>(std::lround(255 - 148 * v));
      char fill[8];
      std::snprintf(fill, sizeof fill, "#%02x%02x%02x", r, g, b);
      const double x = margin + cell * static_cast<double>(j);
      const double y = margin + cell * static_cast<double>(i);
      s += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" +
           num(cell) + "\" fill=\"" + fill + "\" stroke=\"white\"/>\n";
      char label[16];
      std::snprintf(label, sizeof label, "%.3f", matrix.at(i, j));
      s += "<text x=\"" + num(x + cell / 2) + "\" y=\"" + num(y + cell / 2 + 4) +
           "\" text-anchor=\"middle\" fill=\"" + (v > 0.5 ? "white" : "black") + "\">" + label +
           "</text>\n";
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace topictrace
