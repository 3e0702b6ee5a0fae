#include "brainergm/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

#include "brainergm/errors.hpp"
#include "brainergm/rng.hpp"

namespace brainergm {

namespace {

constexpr std::uint64_t kStepStream = 0x5e1ec7;

template <typename F>
void parallel_for(std::size_t count, std::uint32_t threads, F&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<std::uint32_t>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::uint32_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) fn(k);
    });
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return std::string(to_string(err->error_class())) + ": " + e.what();
  return std::string("internal: ") + e.what();
}

/// Runs the configured fitter and records the outcome in a fresh step.
SelectionStep fit_step(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs,
                       const SelectionControl& control, std::uint64_t seed) {
  SelectionStep step;
  step.model = model;
  step.seed = seed;
  try {
    if (control.fitter) {
      step.fit = control.fitter(model, g, attrs, seed);
    } else {
      EstimationControl ec = control.estimation;
      ec.mcmc.seed = seed;
      step.fit = mcmc_mle(model, g, attrs, ec);
    }
    if (!step.fit->converged) {
      step.error = "convergence: fit reported non-convergence";
      step.fit.reset();
    }
  } catch (const CancelledError&) {
    throw;
  } catch (const std::exception& e) {
    step.error = describe(e);
    step.fit.reset();
  }
  return step;
}

std::string format_p(double p) {
  std::ostringstream os;
  os.precision(4);
  os << p;
  return os.str();
}

/// Term indices ordered by decreasing MPLE p-value (index order when the
/// MPLE itself fails).
std::vector<std::size_t> mple_drop_order(const ModelSpec& model, const Graph& g,
                                         const NodeAttributes* attrs) {
  std::vector<std::size_t> order(model.size());
  std::iota(order.begin(), order.end(), 0);
  try {
    const FitResult f = mple(model, g, attrs);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f.wald_p[a] > f.wald_p[b]; });
  } catch (const Error&) {
  }
  return order;
}

}  // namespace

void CandidateSet::validate() const {
  if (terms.terms.empty()) throw ModelError("candidate set is empty");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DataError("alpha must lie in (0, 1]");
}

std::uint64_t selection_step_seed(std::uint64_t seed, std::uint64_t step) noexcept {
  return derive_seed(seed ^ kStepStream, step);
}

SelectionTrace backward_pvalue_select(const CandidateSet& candidates, const Graph& g,
                                      const NodeAttributes* attrs, const SelectionControl& control) {
  candidates.validate();
  require_valid(candidates.terms, g.node_count(), attrs);
  SelectionTrace trace;
  trace.method = "pvalue";
  trace.seed = control.seed;

  ModelSpec current = candidates.terms;
  std::uint64_t counter = 0;
  while (true) {
    SelectionStep step = fit_step(current, g, attrs, control, selection_step_seed(control.seed, counter++));
    if (!step.fit) {
      step.decision = "fit failed";
      const std::size_t failed_index = trace.steps.size();
      trace.steps.push_back(step);
      if (current.size() == 1)
        throw NonConvergenceError("p-value selection: no convergent model remains (" + step.error + ")");
      // Try the single-term removals in order of MPLE p-value until one fits.
      bool recovered = false;
      for (std::size_t drop : mple_drop_order(current, g, attrs)) {
        const ModelSpec reduced = current.without(drop);
        SelectionStep attempt =
            fit_step(reduced, g, attrs, control, selection_step_seed(control.seed, counter++));
        if (attempt.fit) {
          trace.steps[failed_index].decision =
              "fit failed; dropped " + current.terms[drop].to_string() + " to restore convergence";
          current = reduced;
          recovered = true;
          break;
        }
        attempt.decision = "recovery attempt failed";
        trace.steps.push_back(std::move(attempt));
      }
      if (!recovered)
        throw NonConvergenceError("p-value selection: no single-term removal restores convergence");
      continue;
    }

    const FitResult& fit = *step.fit;
    std::size_t worst = 0;
    for (std::size_t t = 1; t < fit.theta.size(); ++t) {
      if (fit.wald_p[t] > fit.wald_p[worst] ||
          (fit.wald_p[t] == fit.wald_p[worst] && std::abs(fit.theta[t]) < std::abs(fit.theta[worst])))
        worst = t;
    }
    if (fit.wald_p[worst] <= candidates.alpha || current.size() == 1) {
      step.decision = fit.wald_p[worst] <= candidates.alpha ? "kept: all terms significant"
                                                             : "kept: single term remains";
      step.final_step = true;
      trace.steps.push_back(std::move(step));
      trace.selected = current;
      break;
    }
    step.decision = "dropped " + current.terms[worst].to_string() + " (p=" + format_p(fit.wald_p[worst]) + ")";
    trace.steps.push_back(std::move(step));
    current = current.without(worst);
  }
  trace.order.resize(trace.steps.size());
  std::iota(trace.order.begin(), trace.order.end(), 0);
  return trace;
}

SelectionTrace aic_select(const CandidateSet& candidates, const Graph& g, const NodeAttributes* attrs,
                          const SelectionControl& control) {
  candidates.validate();
  require_valid(candidates.terms, g.node_count(), attrs);
  SelectionTrace trace;
  trace.method = "aic";
  trace.seed = control.seed;
  const ModelSpec& full = candidates.terms;
  const std::size_t p = full.size();

  auto aic_of = [](const SelectionStep& s) {
    return s.fit && std::isfinite(s.fit->aic) ? s.fit->aic : INFINITY;
  };

  if (candidates.strategy == AicStrategy::exhaustive) {
    if (p > 16) throw ModelError("exhaustive AIC search supports at most 16 candidate terms");
    const std::size_t subsets = (std::size_t{1} << p) - 1;
    std::vector<SelectionStep> steps(subsets);
    parallel_for(subsets, control.threads, [&](std::size_t k) {
      const std::size_t mask = k + 1;
      ModelSpec m;
      for (std::size_t t = 0; t < p; ++t)
        if (mask & (std::size_t{1} << t)) m.terms.push_back(full.terms[t]);
      steps[k] = fit_step(m, g, attrs, control, selection_step_seed(control.seed, mask));
    });
    std::size_t best = subsets;
    for (std::size_t k = 0; k < subsets; ++k) {
      steps[k].decision = steps[k].fit ? "ranked" : "skipped: fit failed";
      if (steps[k].fit && (best == subsets || aic_of(steps[k]) < aic_of(steps[best]))) best = k;
    }
    if (best == subsets) throw NonConvergenceError("AIC selection: every candidate subset failed to fit");
    steps[best].decision = "selected: minimum AIC";
    steps[best].final_step = true;
    trace.selected = steps[best].model;
    trace.order = {best};
    trace.steps = std::move(steps);
    return trace;
  }

  std::uint64_t counter = 0;
  SelectionStep start = fit_step(full, g, attrs, control, selection_step_seed(control.seed, counter++));
  if (!start.fit) {
    start.decision = "fit failed";
    trace.steps.push_back(std::move(start));
    throw NonConvergenceError("AIC selection: the full candidate model failed to fit (" +
                              trace.steps.back().error + ")");
  }
  start.decision = "accepted: starting model";
  trace.steps.push_back(start);
  trace.order.push_back(0);
  ModelSpec current = full;
  double current_aic = aic_of(start);
  std::size_t current_step = 0;

  while (current.size() > 1) {
    std::vector<SelectionStep> tries(current.size());
    const std::uint64_t base = counter;
    counter += current.size();
    parallel_for(current.size(), control.threads, [&](std::size_t d) {
      tries[d] = fit_step(current.without(d), g, attrs, control, selection_step_seed(control.seed, base + d));
    });
    std::size_t best = tries.size();
    for (std::size_t d = 0; d < tries.size(); ++d) {
      tries[d].decision = tries[d].fit ? "candidate deletion of " + current.terms[d].to_string()
                                       : "skipped: fit failed";
      if (tries[d].fit && (best == tries.size() || aic_of(tries[d]) < aic_of(tries[best]))) best = d;
    }
    const std::size_t offset = trace.steps.size();
    if (best == tries.size() || !(aic_of(tries[best]) < current_aic)) {
      for (auto& t : tries) trace.steps.push_back(std::move(t));
      break;
    }
    tries[best].decision = "accepted: deleted " + current.terms[best].to_string();
    current_aic = aic_of(tries[best]);
    current = current.without(best);
    current_step = offset + best;
    for (auto& t : tries) trace.steps.push_back(std::move(t));
    trace.order.push_back(current_step);
  }
  trace.steps[current_step].final_step = true;
  trace.selected = current;
  return trace;
}

std::vector<ModelSpec> graphical_default_models(double decay, const NodeAttributes* attrs) {
  std::vector<ModelSpec> out;
  const std::vector<TermSpec> clustering = {TermSpec::gwesp(decay), TermSpec::gwdsp(decay)};
  std::vector<TermSpec> optional = {TermSpec::gwnsp(decay), TermSpec::gwd(decay)};
  if (attrs != nullptr) optional.push_back(TermSpec::nodematch(attrs->name));
  optional.push_back(TermSpec::two_path());
  for (const TermSpec& c : clustering) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << optional.size()); ++mask) {
      ModelSpec m{{TermSpec::edges(), c}};
      for (std::size_t k = 0; k < optional.size(); ++k)
        if (mask & (std::size_t{1} << k)) m.terms.push_back(optional[k]);
      out.push_back(std::move(m));
    }
  }
  return out;
}

SelectionTrace graphical_rank(const CandidateSet& candidates, const Graph& g,
                              const NodeAttributes* attrs, const SelectionControl& control,
                              std::optional<std::vector<ModelSpec>> models) {
  candidates.validate();
  SelectionTrace trace;
  trace.method = "graphical";
  trace.seed = control.seed;

  std::vector<ModelSpec> list;
  if (models) {
    list = *models;
  } else {
    double decay = kDefaultDecay;
    for (const auto& t : candidates.terms.terms)
      if (t.is_geometric()) {
        decay = t.decay;
        break;
      }
    // Convergence pre-screen: keep models whose MPLE exists.
    for (ModelSpec& m : graphical_default_models(decay, attrs)) {
      try {
        mple(m, g, attrs);
        list.push_back(std::move(m));
      } catch (const Error&) {
      }
    }
  }
  if (list.empty()) throw ModelError("graphical selection has no candidate models");

  std::vector<SelectionStep> steps(list.size());
  parallel_for(list.size(), control.threads, [&](std::size_t k) {
    const std::uint64_t seed = selection_step_seed(control.seed, k);
    steps[k] = fit_step(list[k], g, attrs, control, seed);
    if (!steps[k].fit) return;
    try {
      SamplerControl sc = control.gof;
      sc.seed = derive_seed(seed, 0x90f);
      steps[k].gof = gof_run(*steps[k].fit, g, attrs, sc);
      steps[k].score = steps[k].gof->overall_score;
    } catch (const CancelledError&) {
      throw;
    } catch (const std::exception& e) {
      steps[k].error = describe(e);
    }
  });

  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].gof)
      order.push_back(k);
    else
      steps[k].decision = "failed: " + steps[k].error;
  }
  if (order.empty()) throw NonConvergenceError("graphical selection: every candidate model failed");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return steps[a].score > steps[b].score; });
  for (std::size_t r = 0; r < order.size(); ++r)
    steps[order[r]].decision = "rank " + std::to_string(r + 1) + " (advisory)";
  steps[order.front()].final_step = true;
  trace.selected = steps[order.front()].model;
  trace.order = std::move(order);
  trace.steps = std::move(steps);
  return trace;
}

StatVector average_profile(std::span<const FitResult> fits) {
  if (fits.empty()) throw DataError("cannot average an empty set of fits");
  const ModelSpec& model = fits.front().model;
  StatVector mean(model.size(), 0.0);
  for (const FitResult& f : fits) {
    if (!(f.model == model))
      throw ModelError("parameter profiles use different models: '" + model.to_string() + "' vs '" +
                       f.model.to_string() + "'");
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += f.theta[t];
  }
  for (double& v : mean) v /= static_cast<double>(fits.size());
  return mean;
}

SampleBatch representative_simulate(const ModelSpec& model, std::span<const double> theta,
                                    std::size_t n, const NodeAttributes* attrs,
                                    const SamplerControl& control) {
  return sample(model, theta, n, attrs, control);
}

}  // namespace brainergm
