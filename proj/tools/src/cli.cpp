#include "brainergm/app/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "brainergm/app/engine.hpp"
#include "brainergm/app/service.hpp"

namespace brainergm::app {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string format_p(double p) {
  if (std::isnan(p)) return "NA";
  if (p < 1e-4) return "<0.0001";
  return fmt("%.4f", p);
}

/// Flags shared by every subcommand that samples.
struct Common {
  std::uint64_t seed = 1;
  std::uint32_t threads = 0;
  std::optional<std::uint64_t> burn_in, interval, samples, mcmc_samples;
  std::optional<int> max_iterations;
  bool no_loglik = false;

  RunSettings settings() const {
    RunSettings s;
    s.seed = seed;
    s.threads = threads ? threads : default_threads();
    s.burn_in = burn_in;
    s.interval = interval;
    s.samples = samples;
    s.mcmc_samples = mcmc_samples;
    s.max_iterations = max_iterations;
    s.loglik = !no_loglik;
    return s;
  }
};

void add_seed(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "Master random seed (recorded in every output)")->capture_default_str();
  sub->add_option("--threads", c.threads,
                  "Worker threads for chains and fits (default: BRAINERGM_THREADS, else all cores)");
}

void add_sampler(CLI::App* sub, Common& c) {
  sub->add_option("--burn-in", c.burn_in, "Burn-in proposals for every chain");
  sub->add_option("--interval", c.interval, "Proposals between retained networks");
}

void add_estimation(CLI::App* sub, Common& c) {
  sub->add_option("--mcmc-samples", c.mcmc_samples, "Networks sampled per MCMC-MLE iteration");
  sub->add_option("--max-iterations", c.max_iterations, "MCMC-MLE iteration limit");
  sub->add_flag("--no-loglik", c.no_loglik, "Skip the bridge-sampled log-likelihood (and AIC)");
}

Inputs load_inputs(const std::string& network, const std::string& format, const std::string& attrs,
                   std::ostream& err) {
  Inputs in;
  std::vector<std::string> warnings;
  in.graph = read_network(network, parse_network_format(format), &warnings);
  for (const auto& w : warnings) err << "warning: " << network << ": " << w << "\n";
  if (!attrs.empty()) in.attrs = read_attributes(attrs, in.graph.node_count());
  return in;
}

void print_fit(const FitResult& f, std::ostream& out) {
  out << "model: " << f.model.to_string() << "  method: " << to_string(f.method) << "  nodes: " << f.nodes
      << "  seed: " << f.seed << "\n";
  out << pad_right("term", 18) << pad("estimate", 11) << pad("se", 11) << pad("p-value", 10) << "\n";
  for (std::size_t k = 0; k < f.model.size(); ++k)
    out << pad_right(f.model.terms[k].to_string(), 18) << pad(fmt("%.4f", f.theta[k]), 11)
        << pad(fmt("%.4f", f.se[k]), 11) << pad(format_p(f.wald_p[k]), 10) << "\n";
  out << (f.loglik_is_pseudo ? "log pseudo-likelihood: " : "log-likelihood: ") << fmt("%.3f", f.loglik)
      << "  AIC: " << fmt("%.3f", f.aic) << "  converged: " << (f.converged ? "yes" : "no") << " ("
      << f.iterations << " iterations)\n";
  for (const auto& n : f.notes) out << "note: " << n << "\n";
}

void write_document(const Document& d, const std::string& path, std::ostream& out) {
  write_result(d, path);
  out << "wrote " << path << "\n";
}

// ---- subcommands -----------------------------------------------------------

struct FitArgs {
  std::string network, format = "auto", terms, attrs, method = "mcmc", out;
  double tau = kDefaultDecay;
};

int cmd_fit(const FitArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(a.network, a.format, a.attrs, err);
  const ModelSpec model = ModelSpec::parse(a.terms, a.tau);
  const FitResult f = run_fit(model, in, parse_fit_method(a.method), c.settings());
  print_fit(f, out);
  if (!a.out.empty()) write_document(fit_document(f), a.out, out);
  return 0;
}

struct SimulateArgs {
  std::string theta, terms, attrs, out;
  std::size_t nodes = 0;
  double tau = kDefaultDecay;
};

int cmd_simulate(const SimulateArgs& a, const Common& c, std::ostream& out) {
  const ModelSpec model = ModelSpec::parse(a.terms, a.tau);
  std::optional<NodeAttributes> attrs;
  if (!a.attrs.empty()) attrs = read_attributes(a.attrs, a.nodes);
  const Simulation sim = run_simulate(model, parse_theta(a.theta), a.nodes, attrs ? &*attrs : nullptr,
                                      c.settings());
  fs::create_directories(a.out);
  for (std::size_t k = 0; k < sim.graphs.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "network_%03zu.txt", k);
    write_edge_list(sim.graphs[k], fs::path(a.out) / name);
  }
  write_result(sample_document(sim.summary), fs::path(a.out) / "simulation.json");
  out << "simulated " << sim.graphs.size() << " networks on " << a.nodes << " nodes (seed " << c.seed
      << ", acceptance " << fmt("%.4f", sim.summary.acceptance_rate) << ")\n";
  out << pad_right("term", 18) << pad("mean statistic", 16) << "\n";
  for (std::size_t k = 0; k < model.size(); ++k)
    out << pad_right(model.terms[k].to_string(), 18) << pad(fmt("%.4f", sim.summary.mean_statistics[k]), 16) << "\n";
  if (sim.summary.diagnostics.degenerate) out << "warning: " << sim.summary.diagnostics.reason << "\n";
  out << "wrote " << a.out << "\n";
  return 0;
}

struct GofArgs {
  std::string fit, network, format = "auto", attrs, out;
};

int cmd_gof(const GofArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const FitResult fit = fit_from_document(read_result(a.fit));
  const Inputs in = load_inputs(a.network, a.format, a.attrs, err);
  const GofReport r = run_gof(fit, in, c.settings());
  out << "fit: " << r.fit_reference << "  simulations: " << r.simulation_count << "  seed: " << r.seed << "\n";
  out << pad_right("panel", 10) << pad("bins", 6) << pad("coverage", 10) << "\n";
  for (const auto& p : r.panels)
    out << pad_right(p.name, 10) << pad(std::to_string(p.bins.size()), 6) << pad(fmt("%.3f", p.coverage), 10) << "\n";
  out << "overall score: " << fmt("%.3f", r.overall_score) << "\n";
  if (!a.out.empty()) write_document(gof_plot_data(r), a.out, out);
  return 0;
}

struct SelectArgs {
  std::string method = "graphical", network, format = "auto", attrs, out, strategy = "stepwise";
  std::optional<std::string> candidates;
  double tau = kDefaultDecay, alpha = 0.05;
};

int cmd_select(const SelectArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const Inputs in = load_inputs(a.network, a.format, a.attrs, err);
  SelectRequest req;
  req.method = a.method;
  req.candidates = a.candidates;
  req.tau = a.tau;
  req.alpha = a.alpha;
  req.strategy = parse_aic_strategy(a.strategy);
  const SelectionTrace t = run_select(req, in, c.settings());
  out << "method: " << t.method << "  seed: " << t.seed << "  steps: " << t.steps.size() << "\n";
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    out << pad(std::to_string(k + 1), 3) << "  " << pad_right(s.model.to_string(), 52);
    if (s.fit) out << "  AIC " << pad(fmt("%.2f", s.fit->aic), 9);
    if (s.gof) out << "  score " << fmt("%.3f", s.score);
    out << "  " << s.decision << "\n";
  }
  out << "selected: " << (t.selected ? t.selected->to_string() : std::string("(none)")) << "\n";
  if (!a.out.empty()) write_document(selection_document(t), a.out, out);
  return 0;
}

struct CompareArgs {
  std::vector<std::string> group_a, group_b;
  std::string summary, out;
  bool pooled = false;
};

std::vector<std::string> csv_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return cells;
}

/// CSV with header term,mean_a,se_a,n_a,mean_b,se_b,n_b.
GroupComparison compare_summary(const std::string& path, bool pooled) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<std::string> terms;
  std::vector<CoordinateSummary> a, b;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto cells = csv_cells(line);
    if (header) {
      if (cells != std::vector<std::string>{"term", "mean_a", "se_a", "n_a", "mean_b", "se_b", "n_b"})
        throw DataError(path + ": header must be term,mean_a,se_a,n_a,mean_b,se_b,n_b");
      header = false;
      continue;
    }
    if (cells.size() != 7) throw DataError(path + ": line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      terms.push_back(cells[0]);
      a.push_back({std::stod(cells[1]), std::stod(cells[2]), static_cast<std::size_t>(std::stoul(cells[3]))});
      b.push_back({std::stod(cells[4]), std::stod(cells[5]), static_cast<std::size_t>(std::stoul(cells[6]))});
    } catch (const std::logic_error&) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": malformed number");
    }
  }
  if (terms.empty()) throw DataError(path + ": no rows");
  return group_compare(a, b, terms, pooled);
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  GroupComparison cmp;
  if (!a.summary.empty()) {
    if (!a.group_a.empty() || !a.group_b.empty())
      throw Error(ErrorClass::usage, "use either --summary or --group-a/--group-b");
    cmp = compare_summary(a.summary, a.pooled);
  } else {
    if (a.group_a.empty() || a.group_b.empty())
      throw Error(ErrorClass::usage, "compare needs --summary or both --group-a and --group-b");
    std::vector<FitResult> fa, fb;
    for (const auto& p : a.group_a) fa.push_back(fit_from_document(read_result(p)));
    for (const auto& p : a.group_b) fb.push_back(fit_from_document(read_result(p)));
    cmp = group_compare(fa, fb, a.pooled);
  }
  out << "test: " << (cmp.pooled ? "pooled" : "welch") << " two-sample t\n";
  out << pad_right("term", 16) << pad("mean A (SE)", 20) << pad("mean B (SE)", 20) << pad("t", 9) << pad("df", 8)
      << pad("p-value", 10) << "\n";
  for (const auto& row : cmp.coordinates)
    out << pad_right(row.term, 16) << pad(fmt("%.4f", row.a.mean) + " (" + fmt("%.4f", row.a.se) + ")", 20)
        << pad(fmt("%.4f", row.b.mean) + " (" + fmt("%.4f", row.b.se) + ")", 20) << pad(fmt("%.3f", row.t), 9)
        << pad(fmt("%.2f", row.df), 8) << pad(format_p(row.p), 10) << "\n";
  if (!a.out.empty()) write_document(comparison_document(cmp), a.out, out);
  return 0;
}

struct ThresholdArgs {
  std::string matrix, out, report;
  double s = 2.8;
  bool absolute = false;
};

int cmd_threshold(const ThresholdArgs& a, std::ostream& out) {
  const WeightMatrix w = read_weights(a.matrix);
  const ThresholdResult r = threshold_matrix(w, a.s, a.absolute);
  out << "nodes: " << w.size() << "  target S: " << fmt("%g", a.s) << "  target K: " << fmt("%.4f", r.target_k)
      << "\n";
  out << "threshold: " << fmt("%.6g", r.threshold) << "  edges: " << r.graph.edge_count()
      << "  achieved K: " << fmt("%.4f", r.achieved_k) << "  achieved S: " << fmt("%.4f", r.achieved_s) << "\n";
  if (!a.out.empty()) {
    write_edge_list(r.graph, a.out);
    out << "wrote " << a.out << "\n";
  }
  if (!a.report.empty()) write_document(threshold_document(r, a.s, a.absolute), a.report, out);
  return 0;
}

struct MetricsArgs {
  std::vector<std::string> networks;
  std::string format = "auto", out;
};

void metrics_row(const std::string& label, const MetricReport& m, std::ostream& out) {
  out << pad_right(label, 24) << pad(fmt("%.3f", m.clustering), 8) << pad(fmt("%.3f", m.path_length), 8)
      << pad(fmt("%.3f", m.harmonic_path_length), 8) << pad(fmt("%.3f", m.local_efficiency), 8)
      << pad(fmt("%.3f", m.global_efficiency), 8) << pad(fmt("%.3f", m.mean_degree), 8) << "\n";
}

int cmd_metrics(const MetricsArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  std::vector<Graph> graphs;
  for (const auto& p : a.networks) graphs.push_back(load_inputs(p, a.format, {}, err).graph);
  out << pad_right("network", 24) << pad("C", 8) << pad("L", 8) << pad("L_h", 8) << pad("E_loc", 8)
      << pad("E_glob", 8) << pad("K", 8) << "\n";
  std::vector<MetricReport> reports;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    reports.push_back(descriptive_metrics(graphs[k]));
    metrics_row(fs::path(a.networks[k]).filename().string(), reports.back(), out);
  }
  if (graphs.size() == 1) {
    if (!a.out.empty()) write_document(metrics_document(reports.front(), c.seed), a.out, out);
    return 0;
  }
  const EnsembleMetrics e = ensemble_metrics(reports);
  metrics_row("mean", e.mean, out);
  metrics_row("se", e.se, out);
  if (!a.out.empty()) write_document(ensemble_document(e, c.seed), a.out, out);
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1", data_dir;
  int port = 8080;
  std::size_t workers = 1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
  ServiceOptions o;
  o.workers = a.workers;
  if (!a.data_dir.empty()) o.data_dir = a.data_dir;
  Service service(o);
  const int port = service.bind(a.host, a.port);
  if (port < 0) throw Error(ErrorClass::usage, "cannot bind " + a.host + ":" + std::to_string(a.port));
  out << "serving on http://" << a.host << ":" << port << "\n" << std::flush;
  return service.serve() ? 0 : 5;
}

}  // namespace

int exit_code(ErrorClass c) noexcept {
  switch (c) {
    case ErrorClass::usage:
    case ErrorClass::model: return 2;
    case ErrorClass::data: return 3;
    case ErrorClass::convergence:
    case ErrorClass::degeneracy: return 4;
    case ErrorClass::cancelled:
    case ErrorClass::internal: return 5;
  }
  return 5;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"brainergm: exponential random graph models for brain networks", "brainergm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  Common common;
  FitArgs fit;
  auto* s_fit = app.add_subcommand("fit", "Estimate an ERGM for one network");
  s_fit->add_option("--network", fit.network, "Network file (adjacency matrix or edge list)")->required();
  s_fit->add_option("--terms", fit.terms, "Comma-separated terms, e.g. edges,gwesp:0.75,gwnsp:0.75")->required();
  s_fit->add_option("--attrs", fit.attrs, "Node attribute CSV (node,<name>) for nodematch");
  s_fit->add_option("--method", fit.method, "mple or mcmc")->capture_default_str();
  s_fit->add_option("--tau", fit.tau, "Decay for geometric terms given without one")->capture_default_str();
  s_fit->add_option("--format", fit.format, "auto, matrix or edge-list")->capture_default_str();
  s_fit->add_option("--out", fit.out, "Fit document to write");
  add_seed(s_fit, common);
  add_sampler(s_fit, common);
  add_estimation(s_fit, common);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Draw networks from an ERGM");
  s_sim->add_option("--theta", sim.theta, "Comma-separated parameters (use --theta=-1.5,0.3 for a leading minus)")
      ->required();
  s_sim->add_option("--terms", sim.terms, "Comma-separated terms")->required();
  s_sim->add_option("--nodes", sim.nodes, "Node count")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  s_sim->add_option("--samples", common.samples, "Networks to draw (default 100)");
  s_sim->add_option("--attrs", sim.attrs, "Node attribute CSV for nodematch");
  s_sim->add_option("--tau", sim.tau, "Decay for geometric terms given without one")->capture_default_str();
  s_sim->add_option("--out", sim.out, "Output directory")->required();
  add_seed(s_sim, common);
  add_sampler(s_sim, common);

  GofArgs gof;
  auto* s_gof = app.add_subcommand("gof", "Goodness of fit of a fitted model; writes plot data");
  s_gof->add_option("--fit", gof.fit, "Fit document")->required();
  s_gof->add_option("--network", gof.network, "Observed network")->required();
  s_gof->add_option("--attrs", gof.attrs, "Node attribute CSV");
  s_gof->add_option("--format", gof.format, "auto, matrix or edge-list")->capture_default_str();
  s_gof->add_option("--samples", common.samples, "Simulated networks (default 100)");
  s_gof->add_option("--out", gof.out, "Plot-data document to write");
  add_seed(s_gof, common);
  add_sampler(s_gof, common);

  SelectArgs sel;
  auto* s_sel = app.add_subcommand("select", "Model selection by p-value, AIC or GOF ranking");
  s_sel->add_option("--method", sel.method, "pvalue, aic or graphical")->capture_default_str();
  s_sel->add_option("--network", sel.network, "Observed network")->required();
  s_sel->add_option("--attrs", sel.attrs, "Node attribute CSV");
  s_sel->add_option("--format", sel.format, "auto, matrix or edge-list")->capture_default_str();
  s_sel->add_option("--candidates", sel.candidates,
                    "Candidate terms (pvalue, aic) or ';'-separated models (graphical)");
  s_sel->add_option("--tau", sel.tau, "Decay for geometric terms")->capture_default_str();
  s_sel->add_option("--alpha", sel.alpha, "Significance level for pvalue")->capture_default_str();
  s_sel->add_option("--strategy", sel.strategy, "AIC search: stepwise or exhaustive")->capture_default_str();
  s_sel->add_option("--samples", common.samples, "GOF networks per candidate (graphical)");
  s_sel->add_option("--out", sel.out, "Selection trace document to write");
  add_seed(s_sel, common);
  add_sampler(s_sel, common);
  add_estimation(s_sel, common);

  CompareArgs cmp;
  auto* s_cmp = app.add_subcommand("compare", "Two-group t tests on fitted parameters");
  s_cmp->add_option("--group-a", cmp.group_a, "Fit documents of group A");
  s_cmp->add_option("--group-b", cmp.group_b, "Fit documents of group B");
  s_cmp->add_option("--summary", cmp.summary, "CSV term,mean_a,se_a,n_a,mean_b,se_b,n_b");
  s_cmp->add_flag("--pooled", cmp.pooled, "Pooled-variance test instead of Welch");
  s_cmp->add_option("--out", cmp.out, "Comparison document to write");
  add_seed(s_cmp, common);

  ThresholdArgs thr;
  auto* s_thr = app.add_subcommand("threshold", "Binarize a weighted matrix at a target small-world S");
  s_thr->add_option("--matrix", thr.matrix, "Symmetric weight matrix")->required();
  s_thr->add_option("--s", thr.s, "Target S = log(n)/log(K)")->capture_default_str();
  s_thr->add_flag("--absolute", thr.absolute, "Threshold |w| instead of w");
  s_thr->add_option("--out", thr.out, "Edge list to write");
  s_thr->add_option("--report", thr.report, "Threshold document to write");
  add_seed(s_thr, common);

  MetricsArgs met;
  auto* s_met = app.add_subcommand("metrics", "Clustering, path length, efficiencies and mean degree");
  s_met->add_option("--network", met.networks, "Network file(s); several give an ensemble mean and SE")->required();
  s_met->add_option("--format", met.format, "auto, matrix or edge-list")->capture_default_str();
  s_met->add_option("--out", met.out, "Metrics document to write");
  add_seed(s_met, common);

  ServeArgs srv;
  auto* s_srv = app.add_subcommand("serve", "Start the HTTP job service");
  s_srv->add_option("--port", srv.port, "TCP port (0 picks a free one)")->capture_default_str();
  s_srv->add_option("--host", srv.host, "Address to bind")->capture_default_str();
  s_srv->add_option("--workers", srv.workers, "Job worker threads")->capture_default_str();
  s_srv->add_option("--data-dir", srv.data_dir, "Directory that also receives result documents");
  add_seed(s_srv, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {  // --help, --version
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return exit_code(ErrorClass::usage);
  }

  try {
    if (s_fit->parsed()) return cmd_fit(fit, common, out, err);
    if (s_sim->parsed()) return cmd_simulate(sim, common, out);
    if (s_gof->parsed()) return cmd_gof(gof, common, out, err);
    if (s_sel->parsed()) return cmd_select(sel, common, out, err);
    if (s_cmp->parsed()) return cmd_compare(cmp, out);
    if (s_thr->parsed()) return cmd_threshold(thr, out);
    if (s_met->parsed()) return cmd_metrics(met, common, out, err);
    if (s_srv->parsed()) return cmd_serve(srv, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.error_class()) << ": " << e.what() << "\n";
    return exit_code(e.error_class());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return exit_code(ErrorClass::internal);
  }
  return exit_code(ErrorClass::usage);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"brainergm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace brainergm::app
