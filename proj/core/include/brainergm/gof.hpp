#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brainergm/estimation.hpp"
#include "brainergm/graph.hpp"
#include "brainergm/sampler.hpp"

namespace brainergm {

/// min, lower hinge, median, upper hinge, max.
using FiveNumber = std::array<double, 5>;

/// Tukey five-number summary (hinges are medians of the inclusive halves).
FiveNumber five_number_summary(std::vector<double> values);

/// log(f / (1 - f)) after clamping f into [eps, 1 - eps].
double clamped_logit(double f, double eps) noexcept;

struct GofBin {
  std::string label;
  double observed = 0.0;        // relative frequency
  double observed_logit = 0.0;
  FiveNumber simulated{};       // relative frequencies
  FiveNumber simulated_logit{};
  bool covered = false;         // observed within [min, max]

  friend bool operator==(const GofBin&, const GofBin&) = default;
};

struct GofPanel {
  std::string name;  // degree, esp, geodesic, triad
  std::vector<GofBin> bins;
  double epsilon = 0.0;
  double coverage = 0.0;

  friend bool operator==(const GofPanel&, const GofPanel&) = default;
};

struct GofReport {
  std::string fit_reference;
  std::string model;
  StatVector theta;
  std::uint64_t seed = 0;
  std::size_t simulation_count = 0;
  std::vector<GofPanel> panels;  // degree, esp, geodesic, triad
  double overall_score = 0.0;

  const GofPanel& panel(std::string_view name) const;

  friend bool operator==(const GofReport&, const GofReport&) = default;
};

inline constexpr std::array<std::string_view, 4> kGofPanels = {"degree", "esp", "geodesic", "triad"};

/// Builds the four panels comparing `observed` with `simulated`.
GofReport gof_compare(const Graph& observed, std::span<const Graph> simulated);

/// Simulates control.sample_count networks at fit.theta and compares them with g_obs.
GofReport gof_run(const FitResult& fit, const Graph& g_obs, const NodeAttributes* attrs,
                  const SamplerControl& control);

/// Weighted mean of panel coverages, weights in kGofPanels order.
double gof_score(const GofReport& report, std::span<const double> weights = {});

/// Canonical reference string naming the fit a report was produced from.
std::string fit_reference(const FitResult& fit);

/// GOF control defaults: 100 simulated networks.
SamplerControl default_gof_control();

}  // namespace brainergm
