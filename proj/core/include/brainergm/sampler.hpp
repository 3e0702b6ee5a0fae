#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brainergm/graph.hpp"
#include "brainergm/terms.hpp"

namespace brainergm {

enum class Proposal {
  tie_no_tie,   // pick an edge or a non-edge with probability 1/2 each
  uniform_dyad,
};

enum class InitialState {
  automatic,  // observed graph when one is supplied, otherwise bernoulli
  observed,
  bernoulli,  // density from the Edges coordinate of theta, 1/2 without one
  empty,
};

/// Optional cancellation flag and proposal counter shared with a caller on
/// another thread. Both pointers may be null.
struct RunHooks {
  const std::atomic<bool>* cancel = nullptr;
  std::atomic<std::uint64_t>* proposals = nullptr;
};

struct SamplerControl {
  std::uint64_t burn_in = 100'000;
  std::uint64_t interval = 10'000;
  std::uint64_t sample_count = 100;
  Proposal proposal = Proposal::tie_no_tie;
  std::uint64_t seed = 1;
  InitialState initial = InitialState::automatic;
  /// Independent chains; each runs its own burn-in and contributes an equal
  /// share of the samples. Results do not depend on `threads`.
  std::uint32_t chains = 1;
  /// Worker threads for the chains; 0 means hardware concurrency.
  std::uint32_t threads = 0;
  /// Recompute statistics from scratch at every retained sample and fail on
  /// any drift from the incrementally maintained values.
  bool verify_statistics = false;
  bool fail_on_degeneracy = true;
  bool keep_graphs = true;
  RunHooks hooks;

  /// Throws DataError on invalid values.
  void validate() const;
  std::uint64_t total_proposals() const noexcept;
};

/// Edge density sampled every `spacing` proposals during burn-in.
struct DensityTrace {
  std::vector<double> density;
  std::uint64_t spacing = 1;
};

struct DegeneracyReport {
  bool degenerate = false;
  std::string code;    // empty-graph-collapse, complete-graph-collapse, drift-to-empty, drift-to-complete
  std::string reason;
};

/// Flags traces whose density sits below 0.005 or above 0.995 for the whole
/// final half, or that move strictly monotonically over the final 10^4
/// proposals.
DegeneracyReport degeneracy_check(const DensityTrace& trace);

struct SampleBatch {
  std::vector<Graph> graphs;             // empty when keep_graphs is false
  std::vector<StatVector> stat_trace;
  double acceptance_rate = 0.0;
  DegeneracyReport diagnostics;
  std::vector<DensityTrace> burn_in_traces;  // one per chain
  std::uint64_t seed = 0;

  /// Column means of stat_trace.
  StatVector mean_statistics() const;
};

/// Metropolis-Hastings dyad-toggling sampler for P(y) proportional to exp(theta . g(y)).
/// `observed` seeds the chain for InitialState::observed/automatic.
SampleBatch sample(const CompiledModel& model, std::span<const double> theta,
                   const SamplerControl& control, const Graph* observed = nullptr);

SampleBatch sample(const ModelSpec& model, std::span<const double> theta, std::size_t n,
                   const NodeAttributes* attrs, const SamplerControl& control,
                   const Graph* observed = nullptr);

/// Bernoulli(p) graph on n nodes.
Graph bernoulli_graph(std::size_t n, double p, std::uint64_t seed);

}  // namespace brainergm
