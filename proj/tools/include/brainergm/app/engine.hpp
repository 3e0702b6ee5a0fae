#pragma once

// Shared entry points for the command-line tool and the HTTP service. Both
// front ends translate their inputs into RunSettings and call these, so equal
// inputs and seeds give equal result documents whichever interface is used.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brainergm/documents.hpp"
#include "brainergm/sampler.hpp"

namespace brainergm::app {

struct RunSettings {
  std::uint64_t seed = 1;
  std::uint32_t threads = 0;  // 0: default_threads()
  // Overrides applied to every sampler a run uses.
  std::optional<std::uint64_t> burn_in;
  std::optional<std::uint64_t> interval;
  std::optional<std::uint64_t> samples;       // simulated networks (simulate, gof)
  std::optional<std::uint64_t> mcmc_samples;  // networks per MCMC-MLE iteration
  std::optional<int> max_iterations;
  bool loglik = true;
  RunHooks hooks;
};

/// BRAINERGM_THREADS when set to a positive integer, else 0 (all cores).
std::uint32_t default_threads();

/// Reads the optional "control" object of a job request; unknown keys and
/// wrong types are DataErrors.
void apply_control(const Document& control, RunSettings& settings);

EstimationControl estimation_control(const RunSettings& s);
SamplerControl gof_control(const RunSettings& s);
SamplerControl simulation_control(const RunSettings& s);

/// Upper bound on the proposals a run will make; progress is reported as a
/// fraction of it.
std::uint64_t proposal_budget(const std::string& kind, const RunSettings& s, std::size_t models = 1);

struct Inputs {
  Graph graph;
  std::optional<NodeAttributes> attrs;

  const NodeAttributes* attributes() const { return attrs ? &*attrs : nullptr; }
};

FitResult run_fit(const ModelSpec& model, const Inputs& in, FitMethod method, const RunSettings& s);
GofReport run_gof(const FitResult& fit, const Inputs& in, const RunSettings& s);

struct Simulation {
  SampleSummary summary;
  std::vector<Graph> graphs;
};
Simulation run_simulate(const ModelSpec& model, const StatVector& theta, std::size_t nodes,
                        const NodeAttributes* attrs, const RunSettings& s);

struct SelectRequest {
  std::string method = "graphical";  // pvalue, aic, graphical
  std::optional<std::string> candidates;
  double tau = kDefaultDecay;
  double alpha = 0.05;
  AicStrategy strategy = AicStrategy::backward_stepwise;
};
SelectionTrace run_select(const SelectRequest& req, const Inputs& in, const RunSettings& s);

AicStrategy parse_aic_strategy(std::string_view text);

/// Comma-separated reals, e.g. "-4.48,1.51".
StatVector parse_theta(std::string_view text);

}  // namespace brainergm::app
