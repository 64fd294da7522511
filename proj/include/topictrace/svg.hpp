#pragma once

#include <string>

#include "topictrace/clustering.hpp"
#include "topictrace/divergence.hpp"

namespace topictrace {

// Per-cluster perplexity violins: a histogram outline mirrored about the
// cluster axis, an interquartile box and a median tick, with size labels.
std::string render_violin_svg(const ClusterReport& report);

// Colored grid of JS distances with row and column labels.
std::string render_heatmap_svg(const DistanceMatrix& matrix);

}  // namespace topictrace
