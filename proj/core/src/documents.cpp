#include "brainergm/documents.hpp"

#include <cmath>
#include <fstream>

#include "brainergm/errors.hpp"

#ifndef BRAINERGM_VERSION
#define BRAINERGM_VERSION "0.0.0"
#endif

namespace brainergm {

namespace {

Document real(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "NaN";
  return x > 0 ? "Infinity" : "-Infinity";
}

double get_real(const Document& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "NaN") return NAN;
    if (s == "Infinity") return INFINITY;
    if (s == "-Infinity") return -INFINITY;
  }
  throw DataError("schema violation: expected a number, got " + j.dump());
}

Document reals(std::span<const double> xs) {
  Document out = Document::array();
  for (double x : xs) out.push_back(real(x));
  return out;
}

std::vector<double> get_reals(const Document& j) {
  if (!j.is_array()) throw DataError("schema violation: expected an array, got " + j.dump());
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(get_real(x));
  return out;
}

const Document& field(const Document& j, std::string_view key) {
  if (!j.is_object()) throw DataError("schema violation: expected an object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw DataError("schema violation: missing field '" + std::string(key) + "'");
  return *it;
}

template <class T>
T get(const Document& j, std::string_view key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("schema violation: field '" + std::string(key) + "': " + e.what());
  }
}

double get_real(const Document& j, std::string_view key) { return get_real(field(j, key)); }
std::vector<double> get_reals(const Document& j, std::string_view key) { return get_reals(field(j, key)); }

Document envelope(std::string_view kind, std::uint64_t seed) {
  Document d;
  d["schema_version"] = kSchemaVersion;
  d["kind"] = kind;
  d["tool_version"] = tool_version();
  d["seed"] = seed;
  return d;
}

Document fit_fields(const FitResult& fit) {
  Document d;
  d["model"] = fit.model.to_string();
  Document names = Document::array();
  for (const auto& t : fit.model.terms) names.push_back(t.display_name());
  d["terms"] = names;
  d["method"] = to_string(fit.method);
  d["converged"] = fit.converged;
  d["iterations"] = fit.iterations;
  d["seed"] = fit.seed;
  d["nodes"] = fit.nodes;
  d["theta"] = reals(fit.theta);
  d["se"] = reals(fit.se);
  d["p"] = reals(fit.wald_p);
  Document cov = Document::array();
  for (const auto& row : fit.covariance) cov.push_back(reals(row));
  d["covariance"] = cov;
  d["loglik"] = real(fit.loglik);
  d["loglik_is_pseudo"] = fit.loglik_is_pseudo;
  d["aic"] = real(fit.aic);
  d["observed"] = reals(fit.observed);
  d["notes"] = fit.notes;
  return d;
}

FitResult fit_from_fields(const Document& d) {
  FitResult fit;
  try {
    fit.model = ModelSpec::parse(get<std::string>(d, "model"));
  } catch (const ModelError& e) {
    throw DataError(std::string("schema violation: ") + e.what());
  }
  fit.method = parse_fit_method(get<std::string>(d, "method"));
  fit.converged = get<bool>(d, "converged");
  fit.iterations = get<int>(d, "iterations");
  fit.seed = get<std::uint64_t>(d, "seed");
  fit.nodes = get<std::size_t>(d, "nodes");
  fit.theta = get_reals(d, "theta");
  fit.se = get_reals(d, "se");
  fit.wald_p = get_reals(d, "p");
  for (const auto& row : field(d, "covariance")) fit.covariance.push_back(get_reals(row));
  fit.loglik = get_real(d, "loglik");
  fit.loglik_is_pseudo = get<bool>(d, "loglik_is_pseudo");
  fit.aic = get_real(d, "aic");
  fit.observed = get_reals(d, "observed");
  fit.notes = get<std::vector<std::string>>(d, "notes");
  if (fit.theta.size() != fit.model.size())
    throw DataError("schema violation: theta has " + std::to_string(fit.theta.size()) + " entries for " +
                    std::to_string(fit.model.size()) + " terms");
  return fit;
}

constexpr std::array<const char*, 5> kQuantiles = {"min", "q1", "median", "q3", "max"};

Document gof_fields(const GofReport& r) {
  Document d;
  d["fit_reference"] = r.fit_reference;
  d["model"] = r.model;
  d["theta"] = reals(r.theta);
  d["seed"] = r.seed;
  d["simulation_count"] = r.simulation_count;
  d["overall_score"] = real(r.overall_score);
  Document panels = Document::array();
  for (const auto& p : r.panels) {
    Document pd;
    pd["name"] = p.name;
    pd["epsilon"] = real(p.epsilon);
    pd["coverage"] = real(p.coverage);
    Document bins = Document::array();
    for (const auto& b : p.bins) {
      Document bd;
      bd["label"] = b.label;
      bd["observed"] = real(b.observed);
      bd["observed_logit"] = real(b.observed_logit);
      for (std::size_t q = 0; q < 5; ++q) bd[kQuantiles[q]] = real(b.simulated_logit[q]);
      bd["simulated"] = reals(b.simulated);
      bd["covered"] = b.covered;
      bins.push_back(std::move(bd));
    }
    pd["bins"] = std::move(bins);
    panels.push_back(std::move(pd));
  }
  d["panels"] = std::move(panels);
  return d;
}

GofReport gof_from_fields(const Document& d) {
  GofReport r;
  r.fit_reference = get<std::string>(d, "fit_reference");
  r.model = get<std::string>(d, "model");
  r.theta = get_reals(d, "theta");
  r.seed = get<std::uint64_t>(d, "seed");
  r.simulation_count = get<std::size_t>(d, "simulation_count");
  r.overall_score = get_real(d, "overall_score");
  for (const auto& pd : field(d, "panels")) {
    GofPanel p;
    p.name = get<std::string>(pd, "name");
    p.epsilon = get_real(pd, "epsilon");
    p.coverage = get_real(pd, "coverage");
    for (const auto& bd : field(pd, "bins")) {
      GofBin b;
      b.label = get<std::string>(bd, "label");
      b.observed = get_real(bd, "observed");
      b.observed_logit = get_real(bd, "observed_logit");
      for (std::size_t q = 0; q < 5; ++q) b.simulated_logit[q] = get_real(bd, kQuantiles[q]);
      const auto raw = get_reals(bd, "simulated");
      if (raw.size() != 5) throw DataError("schema violation: 'simulated' needs five numbers");
      std::copy(raw.begin(), raw.end(), b.simulated.begin());
      b.covered = get<bool>(bd, "covered");
      p.bins.push_back(std::move(b));
    }
    r.panels.push_back(std::move(p));
  }
  return r;
}

Document metric_fields(const MetricReport& m) {
  Document d;
  d["clustering"] = real(m.clustering);
  d["path_length"] = real(m.path_length);
  d["local_efficiency"] = real(m.local_efficiency);
  d["global_efficiency"] = real(m.global_efficiency);
  d["mean_degree"] = real(m.mean_degree);
  d["reachable_pair_fraction"] = real(m.reachable_pair_fraction);
  d["harmonic_path_length"] = real(m.harmonic_path_length);
  return d;
}

MetricReport metric_from_fields(const Document& d) {
  MetricReport m;
  m.clustering = get_real(d, "clustering");
  m.path_length = get_real(d, "path_length");
  m.local_efficiency = get_real(d, "local_efficiency");
  m.global_efficiency = get_real(d, "global_efficiency");
  m.mean_degree = get_real(d, "mean_degree");
  m.reachable_pair_fraction = get_real(d, "reachable_pair_fraction");
  m.harmonic_path_length = get_real(d, "harmonic_path_length");
  return m;
}

Document summary_fields(const CoordinateSummary& s) {
  Document d;
  d["mean"] = real(s.mean);
  d["se"] = real(s.se);
  d["n"] = s.n;
  return d;
}

CoordinateSummary summary_from_fields(const Document& d) {
  return {get_real(d, "mean"), get_real(d, "se"), get<std::size_t>(d, "n")};
}

template <class F>
auto wrap_schema(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema violation: ") + e.what());
  }
}

}  // namespace

std::string_view tool_version() noexcept { return BRAINERGM_VERSION; }

void check_document(const Document& doc, std::string_view kind) {
  if (!doc.is_object()) throw DataError("schema violation: document is not an object");
  const auto v = doc.find("schema_version");
  if (v == doc.end() || !v->is_number_integer())
    throw DataError("schema violation: missing integer 'schema_version'");
  if (v->get<long long>() != kSchemaVersion)
    throw DataError("unsupported schema version " + v->dump() + " (this build reads version " +
                    std::to_string(kSchemaVersion) + ")");
  const auto k = doc.find("kind");
  if (k == doc.end() || !k->is_string()) throw DataError("schema violation: missing string 'kind'");
  if (!kind.empty() && k->get_ref<const std::string&>() != kind)
    throw DataError("expected a '" + std::string(kind) + "' document, got '" + k->get<std::string>() + "'");
}

Document fit_document(const FitResult& fit) {
  Document d = envelope("fit", fit.seed);
  d.update(fit_fields(fit));
  return d;
}

FitResult fit_from_document(const Document& doc) {
  check_document(doc, "fit");
  return wrap_schema([&] { return fit_from_fields(doc); });
}

Document gof_plot_data(const GofReport& report) {
  Document d = envelope("gof", report.seed);
  d.update(gof_fields(report));
  return d;
}

GofReport gof_from_document(const Document& doc) {
  check_document(doc, "gof");
  return wrap_schema([&] { return gof_from_fields(doc); });
}

Document selection_document(const SelectionTrace& trace) {
  Document d = envelope("selection", trace.seed);
  d["method"] = trace.method;
  d["selected"] = trace.selected ? Document(trace.selected->to_string()) : Document(nullptr);
  d["order"] = trace.order;
  Document steps = Document::array();
  for (const auto& s : trace.steps) {
    Document sd;
    sd["model"] = s.model.to_string();
    sd["seed"] = s.seed;
    sd["decision"] = s.decision;
    sd["error"] = s.error;
    sd["score"] = real(s.score);
    sd["final"] = s.final_step;
    sd["fit"] = s.fit ? fit_fields(*s.fit) : Document(nullptr);
    sd["gof"] = s.gof ? gof_fields(*s.gof) : Document(nullptr);
    steps.push_back(std::move(sd));
  }
  d["steps"] = std::move(steps);
  return d;
}

SelectionTrace selection_from_document(const Document& doc) {
  check_document(doc, "selection");
  return wrap_schema([&] {
    SelectionTrace t;
    t.method = get<std::string>(doc, "method");
    t.seed = get<std::uint64_t>(doc, "seed");
    if (const auto& sel = field(doc, "selected"); !sel.is_null()) t.selected = ModelSpec::parse(sel.get<std::string>());
    t.order = get<std::vector<std::size_t>>(doc, "order");
    for (const auto& sd : field(doc, "steps")) {
      SelectionStep s;
      s.model = ModelSpec::parse(get<std::string>(sd, "model"));
      s.seed = get<std::uint64_t>(sd, "seed");
      s.decision = get<std::string>(sd, "decision");
      s.error = get<std::string>(sd, "error");
      s.score = get_real(sd, "score");
      s.final_step = get<bool>(sd, "final");
      if (const auto& f = field(sd, "fit"); !f.is_null()) s.fit = fit_from_fields(f);
      if (const auto& g = field(sd, "gof"); !g.is_null()) s.gof = gof_from_fields(g);
      t.steps.push_back(std::move(s));
    }
    return t;
  });
}

Document metrics_document(const MetricReport& report, std::uint64_t seed) {
  Document d = envelope("metrics", seed);
  d["metrics"] = metric_fields(report);
  return d;
}

MetricReport metrics_from_document(const Document& doc) {
  check_document(doc, "metrics");
  return wrap_schema([&] { return metric_from_fields(field(doc, "metrics")); });
}

Document ensemble_document(const EnsembleMetrics& metrics, std::uint64_t seed) {
  Document d = envelope("ensemble-metrics", seed);
  d["count"] = metrics.count;
  d["mean"] = metric_fields(metrics.mean);
  d["se"] = metric_fields(metrics.se);
  return d;
}

EnsembleMetrics ensemble_from_document(const Document& doc) {
  check_document(doc, "ensemble-metrics");
  return wrap_schema([&] {
    EnsembleMetrics e;
    e.count = get<std::size_t>(doc, "count");
    e.mean = metric_from_fields(field(doc, "mean"));
    e.se = metric_from_fields(field(doc, "se"));
    return e;
  });
}

Document comparison_document(const GroupComparison& cmp) {
  Document d = envelope("comparison", 0);
  d["test"] = cmp.pooled ? "pooled" : "welch";
  Document rows = Document::array();
  for (const auto& c : cmp.coordinates) {
    Document r;
    r["term"] = c.term;
    r["a"] = summary_fields(c.a);
    r["b"] = summary_fields(c.b);
    r["t"] = real(c.t);
    r["df"] = real(c.df);
    r["p"] = real(c.p);
    rows.push_back(std::move(r));
  }
  d["coordinates"] = std::move(rows);
  return d;
}

GroupComparison comparison_from_document(const Document& doc) {
  check_document(doc, "comparison");
  return wrap_schema([&] {
    GroupComparison cmp;
    const auto test = get<std::string>(doc, "test");
    if (test != "pooled" && test != "welch") throw DataError("schema violation: unknown test '" + test + "'");
    cmp.pooled = test == "pooled";
    for (const auto& r : field(doc, "coordinates")) {
      CoordinateComparison c;
      c.term = get<std::string>(r, "term");
      c.a = summary_from_fields(field(r, "a"));
      c.b = summary_from_fields(field(r, "b"));
      c.t = get_real(r, "t");
      c.df = get_real(r, "df");
      c.p = get_real(r, "p");
      cmp.coordinates.push_back(std::move(c));
    }
    return cmp;
  });
}

SampleSummary summarize_batch(const SampleBatch& batch, const ModelSpec& model, std::span<const double> theta,
                              std::size_t nodes) {
  SampleSummary s;
  s.model = model.to_string();
  s.theta.assign(theta.begin(), theta.end());
  s.seed = batch.seed;
  s.nodes = nodes;
  s.acceptance_rate = batch.acceptance_rate;
  s.mean_statistics = batch.mean_statistics();
  s.statistics = batch.stat_trace;
  s.diagnostics = batch.diagnostics;
  return s;
}

Document sample_document(const SampleSummary& s) {
  Document d = envelope("simulation", s.seed);
  d["model"] = s.model;
  d["theta"] = reals(s.theta);
  d["nodes"] = s.nodes;
  d["sample_count"] = s.statistics.size();
  d["acceptance_rate"] = real(s.acceptance_rate);
  d["mean_statistics"] = reals(s.mean_statistics);
  Document stats = Document::array();
  for (const auto& row : s.statistics) stats.push_back(reals(row));
  d["statistics"] = std::move(stats);
  Document diag;
  diag["degenerate"] = s.diagnostics.degenerate;
  diag["code"] = s.diagnostics.code;
  diag["reason"] = s.diagnostics.reason;
  d["diagnostics"] = std::move(diag);
  return d;
}

SampleSummary sample_from_document(const Document& doc) {
  check_document(doc, "simulation");
  return wrap_schema([&] {
    SampleSummary s;
    s.model = get<std::string>(doc, "model");
    s.theta = get_reals(doc, "theta");
    s.seed = get<std::uint64_t>(doc, "seed");
    s.nodes = get<std::size_t>(doc, "nodes");
    s.acceptance_rate = get_real(doc, "acceptance_rate");
    s.mean_statistics = get_reals(doc, "mean_statistics");
    for (const auto& row : field(doc, "statistics")) s.statistics.push_back(get_reals(row));
    const auto& diag = field(doc, "diagnostics");
    s.diagnostics.degenerate = get<bool>(diag, "degenerate");
    s.diagnostics.code = get<std::string>(diag, "code");
    s.diagnostics.reason = get<std::string>(diag, "reason");
    return s;
  });
}

Document threshold_document(const ThresholdResult& result, double s_target, bool absolute) {
  Document d = envelope("threshold", 0);
  d["nodes"] = result.graph.node_count();
  d["s_target"] = real(s_target);
  d["absolute"] = absolute;
  d["threshold"] = real(result.threshold);
  d["target_k"] = real(result.target_k);
  d["achieved_k"] = real(result.achieved_k);
  d["achieved_s"] = real(result.achieved_s);
  d["edge_count"] = result.graph.edge_count();
  Document edges = Document::array();
  for (const Edge& e : result.graph.edges()) edges.push_back({e.u, e.v});
  d["edges"] = std::move(edges);
  return d;
}

std::string dump_document(const Document& doc) { return doc.dump(2) + "\n"; }

Document parse_document(std::string_view text) {
  try {
    return Document::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed document: ") + e.what());
  }
}

void write_result(const Document& doc, const std::filesystem::path& path) {
  check_document(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << dump_document(doc);
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

Document read_result(const std::filesystem::path& path) {
  Document doc = parse_document(read_text_file(path));
  check_document(doc);
  return doc;
}

}  // namespace brainergm
