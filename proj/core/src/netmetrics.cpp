#include "brainergm/netmetrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "brainergm/errors.hpp"

namespace brainergm {

namespace {

struct PathSummary {
  double inverse_sum = 0.0;
  double length_sum = 0.0;
  std::size_t reachable = 0;
  std::size_t pairs = 0;
};

PathSummary summarize_paths(const Graph& g) {
  PathSummary s;
  const std::size_t n = g.node_count();
  s.pairs = g.dyad_count();
  for (Node a = 0; a < n; ++a) {
    const auto dist = bfs_distances(g, a);
    for (Node b = a + 1; b < n; ++b) {
      if (dist[b] <= 0) continue;
      s.inverse_sum += 1.0 / dist[b];
      s.length_sum += dist[b];
      ++s.reachable;
    }
  }
  return s;
}

Graph neighbourhood_subgraph(const Graph& g, Node i) {
  const std::vector<Node> nb = g.neighbors(i);
  Graph sub(nb.size());
  for (std::size_t a = 0; a < nb.size(); ++a)
    for (std::size_t b = a + 1; b < nb.size(); ++b)
      if (g.has_edge(nb[a], nb[b])) sub.toggle_unchecked(static_cast<Node>(a), static_cast<Node>(b));
  return sub;
}

constexpr std::array kFields = {&MetricReport::clustering,        &MetricReport::path_length,
                                &MetricReport::local_efficiency,  &MetricReport::global_efficiency,
                                &MetricReport::mean_degree,       &MetricReport::reachable_pair_fraction,
                                &MetricReport::harmonic_path_length};

}  // namespace

double global_efficiency(const Graph& g) {
  const PathSummary s = summarize_paths(g);
  return s.pairs == 0 ? 0.0 : s.inverse_sum / static_cast<double>(s.pairs);
}

MetricReport descriptive_metrics(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n < 2) throw DataError("network metrics need at least two nodes");
  MetricReport r;

  double c_sum = 0.0;
  double eloc_sum = 0.0;
  for (Node i = 0; i < n; ++i) {
    const double d = g.degree(i);
    if (d < 2) continue;
    // Each edge among the neighbours is seen once from each of its ends.
    double links = 0.0;
    g.for_each_neighbor(i, [&](Node k) { links += g.common_neighbors(i, k); });
    links /= 2.0;
    c_sum += 2.0 * links / (d * (d - 1.0));
    eloc_sum += global_efficiency(neighbourhood_subgraph(g, i));
  }
  r.clustering = c_sum / static_cast<double>(n);
  r.local_efficiency = eloc_sum / static_cast<double>(n);

  const PathSummary s = summarize_paths(g);
  r.global_efficiency = s.inverse_sum / static_cast<double>(s.pairs);
  r.path_length = s.reachable == 0 ? 0.0 : s.length_sum / static_cast<double>(s.reachable);
  r.reachable_pair_fraction = static_cast<double>(s.reachable) / static_cast<double>(s.pairs);
  r.harmonic_path_length = s.inverse_sum > 0 ? static_cast<double>(s.pairs) / s.inverse_sum : INFINITY;
  r.mean_degree = 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(n);
  return r;
}

EnsembleMetrics ensemble_metrics(std::span<const MetricReport> reports) {
  if (reports.empty()) throw DataError("ensemble metrics need at least one network");
  EnsembleMetrics out;
  out.count = reports.size();
  const double count = static_cast<double>(reports.size());
  for (auto field : kFields) {
    double mean = 0.0;
    for (const auto& r : reports) mean += r.*field;
    mean /= count;
    double ss = 0.0;
    for (const auto& r : reports) ss += (r.*field - mean) * (r.*field - mean);
    out.mean.*field = mean;
    out.se.*field = reports.size() < 2 ? 0.0 : std::sqrt(ss / (count - 1.0) / count);
  }
  return out;
}

EnsembleMetrics ensemble_metrics(std::span<const Graph> graphs) {
  std::vector<MetricReport> reports;
  reports.reserve(graphs.size());
  for (const Graph& g : graphs) reports.push_back(descriptive_metrics(g));
  return ensemble_metrics(reports);
}

}  // namespace brainergm
