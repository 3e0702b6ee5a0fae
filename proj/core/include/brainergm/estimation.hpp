#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brainergm/graph.hpp"
#include "brainergm/sampler.hpp"
#include "brainergm/terms.hpp"

namespace brainergm {

enum class FitMethod { mple, mcmc_mle };

std::string_view to_string(FitMethod m) noexcept;
FitMethod parse_fit_method(std::string_view text);

/// Outcome of a fit. `loglik` is the pseudo-log-likelihood for MPLE fits
/// (flagged by `loglik_is_pseudo`) and NaN when it was not estimated.
struct FitResult {
  ModelSpec model;
  StatVector theta;
  std::vector<double> se;
  std::vector<std::vector<double>> covariance;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  bool loglik_is_pseudo = false;
  double aic = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> wald_p;
  FitMethod method = FitMethod::mple;
  bool converged = false;
  int iterations = 0;
  std::uint64_t seed = 0;
  std::size_t nodes = 0;
  StatVector observed;  // g(y_obs)
  std::vector<std::string> notes;

  friend bool operator==(const FitResult&, const FitResult&) = default;
};

struct EstimationControl {
  /// Sampler settings for each Monte-Carlo iteration; sample_count is the
  /// number of networks M drawn per iteration.
  SamplerControl mcmc = [] {
    SamplerControl c;
    c.sample_count = 1000;
    c.interval = 10'000;
    c.burn_in = 100'000;
    return c;
  }();
  int max_iterations = 20;
  double tolerance = 1e-3;
  int bridge_count = 16;
  std::uint64_t samples_per_bridge = 500;
  bool compute_loglik = true;

  void validate() const;
};

/// Two-sided p-value of z against the standard normal.
double normal_two_sided_p(double z) noexcept;

/// Maximum pseudo-likelihood: logistic regression of the dyad indicators on
/// their change statistics, maximized by Newton iterations.
FitResult mple(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs = nullptr);

/// Monte-Carlo maximum likelihood, starting from theta0 (default: the MPLE).
FitResult mcmc_mle(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs,
                   const EstimationControl& control,
                   std::optional<StatVector> theta0 = std::nullopt);

struct LogLikEstimate {
  double loglik = 0.0;
  double log_normalizer = 0.0;  // log kappa(theta)
  double reference_log_normalizer = 0.0;
  std::vector<double> bridge_increments;
};

/// l(theta) = theta . g(y) - log kappa(theta), with log kappa bridged from an
/// Edges-only Bernoulli reference at the observed density.
LogLikEstimate log_likelihood(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs,
                              std::span<const double> theta, const EstimationControl& control);

/// Fills se, wald_p and covariance from an information matrix (row-major p x p).
void attach_inverse_information(FitResult& fit, std::span<const double> information);

}  // namespace brainergm
