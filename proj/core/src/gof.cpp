#include "brainergm/gof.hpp"

#include <algorithm>
#include <cmath>

#include "brainergm/errors.hpp"

namespace brainergm {

namespace {

/// Relative-frequency vectors of one network, one per panel, before the
/// bins are unioned across the ensemble.
struct PanelVectors {
  std::vector<double> degree;
  std::vector<double> esp;
  std::vector<double> geodesic;  // distances 1..D
  double unreachable = 0.0;
  std::array<double, 4> triad{};
};

std::vector<double> trimmed(const std::vector<std::int64_t>& counts, double total) {
  std::size_t last = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] != 0) last = k + 1;
  std::vector<double> out(last);
  for (std::size_t k = 0; k < last; ++k)
    out[k] = total > 0 ? static_cast<double>(counts[k]) / total : 0.0;
  return out;
}

PanelVectors panel_vectors(const Graph& g) {
  PanelVectors v;
  const double n = static_cast<double>(g.node_count());
  v.degree = trimmed(degree_distribution(g), n);
  v.esp = trimmed(shared_partner_distributions(g).esp, static_cast<double>(g.edge_count()));
  const double pairs = static_cast<double>(g.dyad_count());
  const GeodesicDistribution geo = geodesic_distribution(g);
  std::vector<std::int64_t> finite(geo.by_distance.begin() + (geo.by_distance.empty() ? 0 : 1),
                                   geo.by_distance.end());
  v.geodesic = trimmed(finite, pairs);
  v.unreachable = pairs > 0 ? static_cast<double>(geo.unreachable) / pairs : 0.0;
  const TriadCensus tc = triad_census(g);
  const double triples = n < 3 ? 0.0 : n * (n - 1) * (n - 2) / 6.0;
  for (std::size_t k = 0; k < 4; ++k) v.triad[k] = triples > 0 ? static_cast<double>(tc[k]) / triples : 0.0;
  return v;
}

double at(const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; }

GofPanel make_panel(std::string name, std::vector<std::string> labels,
                    const std::vector<double>& observed,
                    const std::vector<std::vector<double>>& simulated_by_bin, std::size_t sims) {
  GofPanel panel;
  panel.name = std::move(name);
  const std::size_t bins = labels.size();
  panel.epsilon = 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(bins, 1)) *
                         static_cast<double>(std::max<std::size_t>(sims, 1)));
  std::size_t covered = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    GofBin bin;
    bin.label = std::move(labels[b]);
    bin.observed = observed[b];
    bin.observed_logit = clamped_logit(bin.observed, panel.epsilon);
    bin.simulated = five_number_summary(simulated_by_bin[b]);
    for (std::size_t q = 0; q < 5; ++q) bin.simulated_logit[q] = clamped_logit(bin.simulated[q], panel.epsilon);
    constexpr double slack = 1e-12;
    bin.covered = bin.observed >= bin.simulated[0] - slack && bin.observed <= bin.simulated[4] + slack;
    covered += bin.covered ? 1 : 0;
    panel.bins.push_back(std::move(bin));
  }
  panel.coverage = bins == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(bins);
  return panel;
}

std::vector<std::string> numeric_labels(std::size_t from, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(std::to_string(from + k));
  return out;
}

}  // namespace

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) return {0, 0, 0, 0, 0};
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double n4 = std::floor((n + 3.0) / 2.0) / 2.0;
  const std::array<double, 5> depth = {1.0, n4, (n + 1.0) / 2.0, n + 1.0 - n4, n};
  FiveNumber out{};
  for (std::size_t q = 0; q < 5; ++q) {
    const auto lo = static_cast<std::size_t>(std::floor(depth[q])) - 1;
    const auto hi = static_cast<std::size_t>(std::ceil(depth[q])) - 1;
    out[q] = 0.5 * (values[lo] + values[hi]);
  }
  return out;
}

double clamped_logit(double f, double eps) noexcept {
  const double c = std::clamp(f, eps, 1.0 - eps);
  return std::log(c / (1.0 - c));
}

const GofPanel& GofReport::panel(std::string_view name) const {
  for (const auto& p : panels)
    if (p.name == name) return p;
  throw DataError("GOF report has no panel '" + std::string(name) + "'");
}

GofReport gof_compare(const Graph& observed, std::span<const Graph> simulated) {
  for (const Graph& s : simulated)
    if (s.node_count() != observed.node_count())
      throw DataError("simulated network node count differs from the observed network");
  const PanelVectors obs = panel_vectors(observed);
  std::vector<PanelVectors> sims;
  sims.reserve(simulated.size());
  for (const Graph& s : simulated) sims.push_back(panel_vectors(s));
  const std::size_t count = sims.size();

  std::size_t deg_bins = obs.degree.size();
  std::size_t esp_bins = obs.esp.size();
  std::size_t geo_bins = obs.geodesic.size();
  for (const auto& s : sims) {
    deg_bins = std::max(deg_bins, s.degree.size());
    esp_bins = std::max(esp_bins, s.esp.size());
    geo_bins = std::max(geo_bins, s.geodesic.size());
  }
  deg_bins = std::max<std::size_t>(deg_bins, 1);
  esp_bins = std::max<std::size_t>(esp_bins, 1);

  GofReport report;
  report.simulation_count = count;

  auto collect = [&](std::size_t bins, auto&& get) {
    std::vector<double> o(bins);
    std::vector<std::vector<double>> s(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      o[b] = get(obs, b);
      s[b].reserve(count);
      for (const auto& v : sims) s[b].push_back(get(v, b));
    }
    return std::pair(std::move(o), std::move(s));
  };

  {
    auto [o, s] = collect(deg_bins, [](const PanelVectors& v, std::size_t b) { return at(v.degree, b); });
    report.panels.push_back(make_panel("degree", numeric_labels(0, deg_bins), o, s, count));
  }
  {
    auto [o, s] = collect(esp_bins, [](const PanelVectors& v, std::size_t b) { return at(v.esp, b); });
    report.panels.push_back(make_panel("esp", numeric_labels(0, esp_bins), o, s, count));
  }
  {
    auto labels = numeric_labels(1, geo_bins);
    labels.push_back("NR");
    auto [o, s] = collect(geo_bins + 1, [geo_bins](const PanelVectors& v, std::size_t b) {
      return b < geo_bins ? at(v.geodesic, b) : v.unreachable;
    });
    report.panels.push_back(make_panel("geodesic", std::move(labels), o, s, count));
  }
  {
    auto [o, s] = collect(4, [](const PanelVectors& v, std::size_t b) { return v.triad[b]; });
    report.panels.push_back(make_panel("triad", numeric_labels(0, 4), o, s, count));
  }
  report.overall_score = gof_score(report);
  return report;
}

double gof_score(const GofReport& report, std::span<const double> weights) {
  if (report.panels.empty()) return 0.0;
  if (!weights.empty() && weights.size() != report.panels.size())
    throw DataError("GOF score needs one weight per panel (" + std::to_string(report.panels.size()) + ")");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < report.panels.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    if (w < 0) throw DataError("GOF panel weights must be non-negative");
    num += w * report.panels[k].coverage;
    den += w;
  }
  if (den <= 0) throw DataError("GOF panel weights sum to zero");
  return num / den;
}

std::string fit_reference(const FitResult& fit) {
  return std::string(to_string(fit.method)) + ":" + fit.model.to_string() + ":seed=" +
         std::to_string(fit.seed);
}

SamplerControl default_gof_control() {
  SamplerControl c;
  c.sample_count = 100;
  return c;
}

GofReport gof_run(const FitResult& fit, const Graph& g_obs, const NodeAttributes* attrs,
                  const SamplerControl& control) {
  if (fit.nodes != 0 && fit.nodes != g_obs.node_count())
    throw DataError("fit was computed on " + std::to_string(fit.nodes) + " nodes but the network has " +
                    std::to_string(g_obs.node_count()));
  if (!fit.converged) throw NonConvergenceError("GOF needs a converged fit");
  SamplerControl sc = control;
  sc.keep_graphs = true;
  const SampleBatch batch = sample(fit.model, fit.theta, g_obs.node_count(), attrs, sc, &g_obs);
  GofReport report = gof_compare(g_obs, batch.graphs);
  report.fit_reference = fit_reference(fit);
  report.model = fit.model.to_string();
  report.theta = fit.theta;
  report.seed = control.seed;
  return report;
}

}  // namespace brainergm
