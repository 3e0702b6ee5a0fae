#pragma once

#include <cstddef>
#include <span>

#include "brainergm/graph.hpp"

namespace brainergm {

/// Descriptive connectome metrics of one network.
///
/// Path length averages over reachable pairs only; reachable_pair_fraction
/// says how many pairs that was. With no reachable pair, path_length is 0.
struct MetricReport {
  double clustering = 0.0;
  double path_length = 0.0;
  double local_efficiency = 0.0;
  double global_efficiency = 0.0;
  double mean_degree = 0.0;
  double reachable_pair_fraction = 0.0;
  double harmonic_path_length = 0.0;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

MetricReport descriptive_metrics(const Graph& g);

/// Mean of 1/d(i,j) over all unordered pairs (0 for unreachable pairs).
double global_efficiency(const Graph& g);

struct EnsembleMetrics {
  MetricReport mean;
  MetricReport se;  // standard error of the mean
  std::size_t count = 0;
};

EnsembleMetrics ensemble_metrics(std::span<const Graph> graphs);
EnsembleMetrics ensemble_metrics(std::span<const MetricReport> reports);

}  // namespace brainergm
