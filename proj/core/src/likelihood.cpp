#include <algorithm>
#include <cmath>
#include <numeric>

#include "brainergm/errors.hpp"
#include "brainergm/estimation.hpp"
#include "brainergm/rng.hpp"

namespace brainergm {

namespace {

constexpr std::uint64_t kBridgeStreamBase = 1'000'000;
constexpr double kMinEssFraction = 0.01;

struct LogMeanExp {
  double value;
  double ess;
};

LogMeanExp log_mean_exp(const std::vector<double>& a) {
  const double mx = *std::max_element(a.begin(), a.end());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : a) {
    const double w = std::exp(v - mx);
    sum += w;
    sum_sq += w * w;
  }
  return {mx + std::log(sum / static_cast<double>(a.size())), sum * sum / sum_sq};
}

}  // namespace

LogLikEstimate log_likelihood(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs,
                              std::span<const double> theta, const EstimationControl& control) {
  control.validate();
  if (theta.size() != model.size())
    throw ModelError("theta has " + std::to_string(theta.size()) + " coordinates, model has " +
                     std::to_string(model.size()));
  const std::size_t dyads = g.dyad_count();
  const std::size_t m = g.edge_count();
  if (m == 0 || m == dyads)
    throw DataError("log-likelihood bridging needs a graph that is neither empty nor complete");

  // Work in the model augmented with Edges (if absent) so the Bernoulli
  // reference lies on the same segment as theta.
  ModelSpec aug = model;
  StatVector target(theta.begin(), theta.end());
  std::size_t edges_at = 0;
  if (auto e = model.index_of(TermKind::edges)) {
    edges_at = *e;
  } else {
    aug.terms.push_back(TermSpec::edges());
    target.push_back(0.0);
    edges_at = aug.size() - 1;
  }
  const CompiledModel compiled(aug, g.node_count(), attrs);
  const StatVector observed = compiled.evaluate(g);

  const double d = static_cast<double>(m) / static_cast<double>(dyads);
  StatVector reference(aug.size(), 0.0);
  reference[edges_at] = std::log(d / (1.0 - d));

  LogLikEstimate out;
  out.reference_log_normalizer =
      static_cast<double>(dyads) * std::log1p(std::exp(reference[edges_at]));

  const int bridges = control.bridge_count;
  const bool identical = std::equal(reference.begin(), reference.end(), target.begin());
  double log_ratio = 0.0;
  if (!identical) {
    const std::size_t p = aug.size();
    StatVector a(p), b(p), mid(p);
    for (int k = 0; k < bridges; ++k) {
      const double fa = static_cast<double>(k) / bridges;
      const double fb = static_cast<double>(k + 1) / bridges;
      for (std::size_t t = 0; t < p; ++t) {
        a[t] = reference[t] + fa * (target[t] - reference[t]);
        b[t] = reference[t] + fb * (target[t] - reference[t]);
        mid[t] = 0.5 * (a[t] + b[t]);
      }
      SamplerControl sc = control.mcmc;
      sc.seed = derive_seed(control.mcmc.seed, kBridgeStreamBase + static_cast<std::uint64_t>(k));
      sc.sample_count = control.samples_per_bridge;
      sc.chains = std::min<std::uint32_t>(sc.chains, static_cast<std::uint32_t>(sc.sample_count));
      sc.keep_graphs = false;
      sc.initial = InitialState::observed;
      const SampleBatch batch = sample(compiled, mid, sc, &g);

      std::vector<double> up, down;
      up.reserve(batch.stat_trace.size());
      down.reserve(batch.stat_trace.size());
      for (const auto& s : batch.stat_trace) {
        double u = 0.0, v = 0.0;
        for (std::size_t t = 0; t < p; ++t) {
          const double centered = s[t] - observed[t];
          u += (b[t] - mid[t]) * centered;
          v += (a[t] - mid[t]) * centered;
        }
        up.push_back(u);
        down.push_back(v);
      }
      const LogMeanExp hi = log_mean_exp(up);
      const LogMeanExp lo = log_mean_exp(down);
      const double floor = kMinEssFraction * static_cast<double>(up.size());
      if (hi.ess < floor || lo.ess < floor)
        throw NonConvergenceError("bridge variance explosion at bridge " + std::to_string(k) + " of " +
                                  std::to_string(bridges) + " (effective sample size " +
                                  std::to_string(std::min(hi.ess, lo.ess)) + ")");
      // The g(y_obs) centring contributes (b - a) . g(y_obs), added back here.
      double shift = 0.0;
      for (std::size_t t = 0; t < p; ++t) shift += (b[t] - a[t]) * observed[t];
      const double inc = hi.value - lo.value + shift;
      out.bridge_increments.push_back(inc);
      log_ratio += inc;
    }
  }

  out.log_normalizer = out.reference_log_normalizer + log_ratio;
  out.loglik = dot(target, observed) - out.log_normalizer;
  return out;
}

}  // namespace brainergm
