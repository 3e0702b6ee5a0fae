#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brainergm/estimation.hpp"
#include "brainergm/gof.hpp"
#include "brainergm/terms.hpp"

namespace brainergm {

enum class AicStrategy { backward_stepwise, exhaustive };

struct CandidateSet {
  ModelSpec terms = ModelSpec::full_candidate();
  double alpha = 0.05;
  AicStrategy strategy = AicStrategy::backward_stepwise;

  void validate() const;
};

/// Fits one model; `seed` is the per-step seed recorded in the trace.
using Fitter = std::function<FitResult(const ModelSpec&, const Graph&, const NodeAttributes*,
                                       std::uint64_t seed)>;

struct SelectionControl {
  EstimationControl estimation;
  SamplerControl gof = default_gof_control();
  std::uint64_t seed = 1;
  /// Replaces MCMC MLE when set (e.g. an exact fitter on tiny graphs).
  Fitter fitter;
  /// Worker threads for independent candidate fits; 0 = hardware concurrency.
  std::uint32_t threads = 1;
};

struct SelectionStep {
  ModelSpec model;
  std::uint64_t seed = 0;
  std::optional<FitResult> fit;  // absent when the fit failed
  std::string error;             // "<class>: message" when the fit failed
  std::string decision;
  std::optional<GofReport> gof;
  double score = 0.0;  // graphical method only
  bool final_step = false;

  friend bool operator==(const SelectionStep&, const SelectionStep&) = default;
};

struct SelectionTrace {
  std::string method;  // pvalue, aic, graphical
  std::uint64_t seed = 0;
  std::vector<SelectionStep> steps;
  std::optional<ModelSpec> selected;
  /// Graphical: step indices by decreasing score. AIC stepwise: indices of
  /// the accepted models in order.
  std::vector<std::size_t> order;

  friend bool operator==(const SelectionTrace&, const SelectionTrace&) = default;
};

/// Seed used for the fit at `step` of a selection run with master `seed`.
std::uint64_t selection_step_seed(std::uint64_t seed, std::uint64_t step) noexcept;

SelectionTrace backward_pvalue_select(const CandidateSet& candidates, const Graph& g,
                                      const NodeAttributes* attrs, const SelectionControl& control);

SelectionTrace aic_select(const CandidateSet& candidates, const Graph& g, const NodeAttributes* attrs,
                          const SelectionControl& control);

/// Default candidate family: Edges + exactly one of {GWESP, GWDSP} + any
/// subset of {GWNSP, GWD, Nodematch, TwoPath}; Nodematch only with attributes.
std::vector<ModelSpec> graphical_default_models(double decay, const NodeAttributes* attrs);

/// Fits every model, runs GOF on each and ranks by score. The ranking is
/// advisory; a person makes the final call.
SelectionTrace graphical_rank(const CandidateSet& candidates, const Graph& g,
                              const NodeAttributes* attrs, const SelectionControl& control,
                              std::optional<std::vector<ModelSpec>> models = std::nullopt);

struct CoordinateSummary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  std::size_t n = 0;
};

struct CoordinateComparison {
  std::string term;
  CoordinateSummary a;
  CoordinateSummary b;
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

struct GroupComparison {
  std::vector<CoordinateComparison> coordinates;
  bool pooled = false;
};

/// Two-sample t tests per coordinate (Welch unless `pooled`).
GroupComparison group_compare(std::span<const CoordinateSummary> a,
                              std::span<const CoordinateSummary> b,
                              std::span<const std::string> terms = {}, bool pooled = false);
GroupComparison group_compare(std::span<const FitResult> a, std::span<const FitResult> b,
                              bool pooled = false);

std::vector<CoordinateSummary> summarize_group(std::span<const FitResult> fits);

/// Coordinate-wise mean of the fitted parameters.
StatVector average_profile(std::span<const FitResult> fits);

SampleBatch representative_simulate(const ModelSpec& model, std::span<const double> theta,
                                    std::size_t n, const NodeAttributes* attrs,
                                    const SamplerControl& control);

}  // namespace brainergm
