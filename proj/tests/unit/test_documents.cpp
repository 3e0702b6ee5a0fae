#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "brainergm/documents.hpp"
#include "brainergm/errors.hpp"
#include "brainergm/sampler.hpp"

using namespace brainergm;

namespace {

Graph ring(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i) g.set_edge(static_cast<Node>(i), static_cast<Node>((i + 1) % n), true);
  g.set_edge(0, 2, true);
  return g;
}

FitResult some_fit() {
  FitResult f = mple(ModelSpec::parse("edges,gwesp:0.75"), ring(12));
  f.notes.push_back("a note");
  f.seed = 42;
  return f;
}

Document reparse(const Document& d) { return parse_document(dump_document(d)); }

}  // namespace

TEST(Documents, EnvelopeAndFitRoundTrip) {
  const FitResult f = some_fit();
  const Document d = fit_document(f);
  EXPECT_EQ(d["schema_version"], kSchemaVersion);
  EXPECT_EQ(d["kind"], "fit");
  EXPECT_EQ(d["tool_version"], std::string(tool_version()));
  EXPECT_EQ(d["seed"], 42);
  EXPECT_EQ(d.begin().key(), "schema_version");
  EXPECT_EQ(fit_from_document(reparse(d)), f);
  EXPECT_EQ(dump_document(d), dump_document(fit_document(fit_from_document(reparse(d)))));
}

TEST(Documents, NonFiniteNumbers) {
  FitResult f = some_fit();
  f.loglik = NAN;
  f.aic = INFINITY;
  f.theta[0] = -INFINITY;
  const Document d = fit_document(f);
  EXPECT_EQ(d["loglik"], "NaN");
  EXPECT_EQ(d["aic"], "Infinity");
  const FitResult back = fit_from_document(reparse(d));
  EXPECT_TRUE(std::isnan(back.loglik));
  EXPECT_EQ(back.aic, INFINITY);
  EXPECT_EQ(back.theta[0], -INFINITY);

  const MetricReport m = descriptive_metrics(Graph(5));
  EXPECT_EQ(metrics_from_document(reparse(metrics_document(m, 3))), m);
}

TEST(Documents, GofRoundTrip) {
  SamplerControl c = default_gof_control();
  c.sample_count = 20;
  c.burn_in = 2000;
  c.interval = 100;
  const Graph g = ring(12);
  const GofReport r = gof_run(some_fit(), g, nullptr, c);
  const Document d = gof_plot_data(r);
  EXPECT_EQ(d["kind"], "gof");
  ASSERT_EQ(d["panels"].size(), 4u);
  const auto& bin = d["panels"][0]["bins"][0];
  for (const char* key : {"label", "observed", "observed_logit", "min", "q1", "median", "q3", "max", "simulated"})
    EXPECT_TRUE(bin.contains(key)) << key;
  EXPECT_EQ(gof_from_document(reparse(d)), r);
}

TEST(Documents, SelectionRoundTrip) {
  SelectionTrace t;
  t.method = "pvalue";
  t.seed = 9;
  t.order = {1, 0};
  SelectionStep ok;
  ok.model = ModelSpec::parse("edges,gwesp:0.75");
  ok.fit = some_fit();
  ok.decision = "drop gwesp";
  SelectionStep failed;
  failed.model = ModelSpec::parse("edges,kcycle:3");
  failed.error = "convergence: did not converge";
  failed.final_step = true;
  t.steps = {ok, failed};
  t.selected = ModelSpec::parse("edges");
  EXPECT_EQ(selection_from_document(reparse(selection_document(t))), t);
  t.selected.reset();
  const Document d = selection_document(t);
  EXPECT_TRUE(d["selected"].is_null());
  EXPECT_EQ(selection_from_document(reparse(d)), t);
}

TEST(Documents, MetricsEnsembleComparison) {
  const Graph g = ring(10);
  const MetricReport m = descriptive_metrics(g);
  const Document md = metrics_document(m, 0);
  EXPECT_TRUE(md["metrics"].contains("harmonic_path_length"));
  EXPECT_EQ(metrics_from_document(reparse(md)), m);

  Graph h = ring(10);
  h.toggle(3, 7);
  const std::vector<Graph> gs{g, ring(10), h};
  const EnsembleMetrics e = ensemble_metrics(gs);
  const EnsembleMetrics eb = ensemble_from_document(reparse(ensemble_document(e, 4)));
  EXPECT_EQ(eb.mean, e.mean);
  EXPECT_EQ(eb.se, e.se);
  EXPECT_EQ(eb.count, e.count);

  const std::vector<CoordinateSummary> a{{1.0, 0.1, 5}}, b{{1.5, 0.2, 5}};
  const std::vector<std::string> names{"edges"};
  const GroupComparison cmp = group_compare(a, b, names, true);
  const GroupComparison back = comparison_from_document(reparse(comparison_document(cmp)));
  EXPECT_TRUE(back.pooled);
  ASSERT_EQ(back.coordinates.size(), 1u);
  EXPECT_EQ(back.coordinates[0].term, "edges");
  EXPECT_EQ(back.coordinates[0].t, cmp.coordinates[0].t);
  EXPECT_EQ(back.coordinates[0].p, cmp.coordinates[0].p);
  EXPECT_EQ(back.coordinates[0].b.n, 5u);
}

TEST(Documents, SimulationRoundTrip) {
  const ModelSpec m = ModelSpec::parse("edges,gwesp:0.75");
  const std::vector<double> theta{-1.5, 0.3};
  SamplerControl c;
  c.burn_in = 1000;
  c.interval = 100;
  c.sample_count = 5;
  c.seed = 8;
  const SampleBatch b = sample(m, theta, 10, nullptr, c);
  const SampleSummary s = summarize_batch(b, m, theta, 10);
  EXPECT_EQ(s.statistics.size(), 5u);
  EXPECT_EQ(sample_from_document(reparse(sample_document(s))), s);
}

TEST(Documents, ValidationErrors) {
  Document d = fit_document(some_fit());
  EXPECT_NO_THROW(check_document(d, "fit"));
  EXPECT_THROW(check_document(d, "gof"), DataError);

  Document future = d;
  future["schema_version"] = 2;
  try {
    check_document(future);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported schema version 2"), std::string::npos);
  }

  Document broken = d;
  broken.erase("theta");
  try {
    fit_from_document(broken);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("schema violation"), std::string::npos);
  }
  broken = d;
  broken["nodes"] = "many";
  EXPECT_THROW(fit_from_document(broken), DataError);
  EXPECT_THROW(parse_document("{not json"), DataError);
  EXPECT_THROW(check_document(Document::array()), DataError);
}

TEST(Documents, FilesAndThreshold) {
  const auto path = std::filesystem::temp_directory_path() / "brainergm_doc_test.json";
  const Document d = fit_document(some_fit());
  write_result(d, path);
  EXPECT_EQ(read_result(path), d);
  std::filesystem::remove(path);

  std::vector<double> w(16, 0.0);
  w[1] = w[4] = 0.9;
  w[11] = w[14] = 0.5;
  const auto r = threshold_matrix(WeightMatrix(4, w), 1e6);
  const Document td = threshold_document(r, 1e6, false);
  EXPECT_EQ(td["kind"], "threshold");
  EXPECT_EQ(td["edges"].size(), r.graph.edge_count());
}
