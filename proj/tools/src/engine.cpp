#include "brainergm/app/engine.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "brainergm/errors.hpp"

namespace brainergm::app {

namespace {

std::uint64_t read_count(const Document& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw DataError("schema violation: control." + key + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

void apply_sampler(const RunSettings& s, SamplerControl& c) {
  if (s.burn_in) c.burn_in = *s.burn_in;
  if (s.interval) c.interval = *s.interval;
  c.threads = s.threads ? s.threads : default_threads();
  c.hooks = s.hooks;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

std::uint32_t default_threads() {
  const char* env = std::getenv("BRAINERGM_THREADS");
  if (!env || !*env) return 0;
  std::uint32_t v = 0;
  const auto [end, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), v);
  if (ec != std::errc{} || *end != '\0' || v == 0)
    throw Error(ErrorClass::usage, std::string("BRAINERGM_THREADS must be a positive integer, got '") + env + "'");
  return v;
}

void apply_control(const Document& control, RunSettings& s) {
  if (control.is_null()) return;
  if (!control.is_object()) throw DataError("schema violation: control must be an object");
  for (const auto& [key, v] : control.items()) {
    if (key == "burn_in") s.burn_in = read_count(v, key);
    else if (key == "interval") s.interval = read_count(v, key);
    else if (key == "samples") s.samples = read_count(v, key);
    else if (key == "mcmc_samples") s.mcmc_samples = read_count(v, key);
    else if (key == "max_iterations") s.max_iterations = static_cast<int>(read_count(v, key));
    else if (key == "threads") s.threads = static_cast<std::uint32_t>(read_count(v, key));
    else if (key == "loglik") {
      if (!v.is_boolean()) throw DataError("schema violation: control.loglik must be a boolean");
      s.loglik = v.get<bool>();
    } else {
      throw DataError("schema violation: unknown control field '" + key + "'");
    }
  }
}

EstimationControl estimation_control(const RunSettings& s) {
  EstimationControl c;
  apply_sampler(s, c.mcmc);
  c.mcmc.seed = s.seed;
  if (s.mcmc_samples) c.mcmc.sample_count = *s.mcmc_samples;
  if (s.max_iterations) c.max_iterations = *s.max_iterations;
  c.compute_loglik = s.loglik;
  c.validate();
  return c;
}

SamplerControl gof_control(const RunSettings& s) {
  SamplerControl c = default_gof_control();
  apply_sampler(s, c);
  c.seed = s.seed;
  if (s.samples) c.sample_count = *s.samples;
  c.validate();
  return c;
}

SamplerControl simulation_control(const RunSettings& s) {
  SamplerControl c;
  apply_sampler(s, c);
  c.seed = s.seed;
  if (s.samples) c.sample_count = *s.samples;
  c.validate();
  return c;
}

std::uint64_t proposal_budget(const std::string& kind, const RunSettings& s, std::size_t models) {
  if (kind == "simulate") return simulation_control(s).total_proposals();
  if (kind == "gof") return gof_control(s).total_proposals();
  const EstimationControl e = estimation_control(s);
  std::uint64_t fit = e.mcmc.total_proposals() * static_cast<std::uint64_t>(e.max_iterations);
  if (e.compute_loglik)
    fit += static_cast<std::uint64_t>(e.bridge_count) *
           (e.mcmc.burn_in + e.samples_per_bridge * e.mcmc.interval);
  if (kind == "fit") return fit;
  return (fit + gof_control(s).total_proposals()) * models;  // select
}

FitResult run_fit(const ModelSpec& model, const Inputs& in, FitMethod method, const RunSettings& s) {
  if (method == FitMethod::mple) {
    FitResult f = mple(model, in.graph, in.attributes());
    f.seed = s.seed;
    return f;
  }
  return mcmc_mle(model, in.graph, in.attributes(), estimation_control(s));
}

GofReport run_gof(const FitResult& fit, const Inputs& in, const RunSettings& s) {
  return gof_run(fit, in.graph, in.attributes(), gof_control(s));
}

Simulation run_simulate(const ModelSpec& model, const StatVector& theta, std::size_t nodes,
                        const NodeAttributes* attrs, const RunSettings& s) {
  if (theta.size() != model.size())
    throw ModelError("theta has " + std::to_string(theta.size()) + " values but the model has " +
                     std::to_string(model.size()) + " terms");
  SampleBatch b = sample(model, theta, nodes, attrs, simulation_control(s));
  Simulation out;
  out.summary = summarize_batch(b, model, theta, nodes);
  out.graphs = std::move(b.graphs);
  return out;
}

SelectionTrace run_select(const SelectRequest& req, const Inputs& in, const RunSettings& s) {
  SelectionControl c;
  c.seed = s.seed;
  c.estimation = estimation_control(s);
  c.gof = gof_control(s);
  c.threads = s.threads ? s.threads : default_threads();

  CandidateSet cs;
  cs.alpha = req.alpha;
  cs.strategy = req.strategy;
  cs.terms = ModelSpec::full_candidate(req.tau, in.attrs ? in.attrs->name : std::string{});
  if (!in.attrs) cs.terms = cs.terms.without(*cs.terms.index_of(TermKind::nodematch));

  if (req.method == "graphical") {
    std::optional<std::vector<ModelSpec>> models;
    if (req.candidates) {
      models.emplace();
      for (const std::string& m : split(*req.candidates, ';')) models->push_back(ModelSpec::parse(m, req.tau));
    }
    return graphical_rank(cs, in.graph, in.attributes(), c, models);
  }
  if (req.candidates) cs.terms = ModelSpec::parse(*req.candidates, req.tau);
  if (req.method == "pvalue") return backward_pvalue_select(cs, in.graph, in.attributes(), c);
  if (req.method == "aic") return aic_select(cs, in.graph, in.attributes(), c);
  throw Error(ErrorClass::usage, "unknown selection method '" + req.method + "' (expected pvalue, aic or graphical)");
}

AicStrategy parse_aic_strategy(std::string_view text) {
  if (text == "stepwise") return AicStrategy::backward_stepwise;
  if (text == "exhaustive") return AicStrategy::exhaustive;
  throw Error(ErrorClass::usage, "unknown AIC strategy '" + std::string(text) + "' (expected stepwise or exhaustive)");
}

StatVector parse_theta(std::string_view text) {
  StatVector out;
  for (const std::string& item : split(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw DataError("theta: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw DataError("theta is empty");
  return out;
}

}  // namespace brainergm::app
