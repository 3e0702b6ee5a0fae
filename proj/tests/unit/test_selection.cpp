#include <gtest/gtest.h>

#include <cmath>

#include "brainergm/errors.hpp"
#include "brainergm/selection.hpp"
#include "exact_fit.hpp"
#include "oracle.hpp"

using namespace brainergm;

namespace {

Fitter exact_fitter() {
  return [](const ModelSpec& m, const Graph& g, const NodeAttributes*, std::uint64_t seed) {
    return oracle::exact_fit(m, g, seed);
  };
}

Fitter mple_fitter() {
  return [](const ModelSpec& m, const Graph& g, const NodeAttributes* a, std::uint64_t seed) {
    FitResult f = mple(m, g, a);
    f.seed = seed;
    return f;
  };
}

SelectionControl fast_mcmc(std::uint64_t seed) {
  SelectionControl c;
  c.seed = seed;
  c.estimation.mcmc.sample_count = 300;
  c.estimation.mcmc.burn_in = 10'000;
  c.estimation.mcmc.interval = 300;
  c.estimation.bridge_count = 6;
  c.estimation.samples_per_bridge = 150;
  c.gof.sample_count = 40;
  c.gof.burn_in = 10'000;
  c.gof.interval = 1'000;
  return c;
}

CandidateSet candidates(const std::string& terms, double alpha = 0.05) {
  CandidateSet c;
  c.terms = ModelSpec::parse(terms);
  c.alpha = alpha;
  return c;
}

}  // namespace

TEST(PValueSelection, AlphaOneReturnsFullModel) {
  const Graph g = bernoulli_graph(25, 0.2, 1);
  auto c = fast_mcmc(1);
  c.fitter = mple_fitter();
  const auto trace = backward_pvalue_select(candidates("edges,twopath,gwesp:0.75", 1.0), g, nullptr, c);
  ASSERT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(*trace.selected, ModelSpec::parse("edges,twopath,gwesp:0.75"));
  EXPECT_TRUE(trace.steps[0].final_step);
}

TEST(PValueSelection, OneTermPerStepEndingSignificant) {
  auto c = fast_mcmc(5);
  c.fitter = mple_fitter();
  for (std::uint64_t rep = 0; rep < 6; ++rep) {
    const Graph g = bernoulli_graph(30, 0.15, 100 + rep);
    const auto trace = backward_pvalue_select(candidates("edges,twopath,gwesp:0.75,gwnsp:0.75,gwd:0.75"), g, nullptr, c);
    for (std::size_t s = 1; s < trace.steps.size(); ++s)
      EXPECT_EQ(trace.steps[s].model.size() + 1, trace.steps[s - 1].model.size());
    const auto& last = trace.steps.back();
    ASSERT_TRUE(last.final_step);
    ASSERT_TRUE(last.fit);
    if (last.model.size() > 1)
      for (double p : last.fit->wald_p) EXPECT_LE(p, 0.05);
    EXPECT_EQ(*trace.selected, last.model);
  }
}

TEST(PValueSelection, DropsTwoPathOnBernoulliData) {
  int dropped = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const Graph g = bernoulli_graph(30, 0.1, 500 + rep);
    auto c = fast_mcmc(rep + 1);
    c.estimation.compute_loglik = false;
    try {
      const auto trace = backward_pvalue_select(candidates("edges,twopath"), g, nullptr, c);
      if (!trace.selected->index_of(TermKind::two_path)) ++dropped;
    } catch (const Error&) {
    }
  }
  EXPECT_GT(dropped, 10);
}

TEST(PValueSelection, AllSignificantFixedPoint) {
  // Two dense blocks: edges and nodematch are both needed.
  const auto attrs = NodeAttributes::from_labels(
      "side", std::vector<std::string>{"L", "L", "L", "L", "L", "L", "L", "L", "L", "L", "R", "R", "R", "R", "R",
                                       "R", "R", "R", "R", "R"});
  Graph g(20);
  for (Node i = 0; i < 20; ++i)
    for (Node j = i + 1; j < 20; ++j)
      if ((attrs.matches(i, j) && (i + j) % 3 != 0) || (!attrs.matches(i, j) && (i * j) % 11 == 1))
        g.set_edge(i, j, true);
  auto c = fast_mcmc(3);
  c.fitter = mple_fitter();
  const auto trace = backward_pvalue_select(candidates("edges,nodematch"), g, &attrs, c);
  EXPECT_EQ(trace.steps.size(), 1u);
}

TEST(PValueSelection, RecoversFromFailedFullModel) {
  // MPLE of the triangle term separates on two disjoint triangles.
  const Graph g = Graph::from_edges(
      9, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
  auto c = fast_mcmc(3);
  c.fitter = mple_fitter();
  const auto trace = backward_pvalue_select(candidates("edges,kcycle:3", 1.0), g, nullptr, c);
  ASSERT_GE(trace.steps.size(), 2u);
  EXPECT_FALSE(trace.steps[0].fit);
  EXPECT_NE(trace.steps[0].decision.find("restore convergence"), std::string::npos);
  EXPECT_EQ(trace.selected->size(), 1u);
}

TEST(AicSelection, ExhaustiveCountsAndPrefersTrueModel) {
  int edges_only = 0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const Graph g = bernoulli_graph(6, 0.5, 900 + rep);
    SelectionControl c;
    c.seed = rep;
    c.fitter = exact_fitter();
    CandidateSet cs = candidates("edges,gwesp:0.75");
    cs.strategy = AicStrategy::exhaustive;
    try {
      const auto trace = aic_select(cs, g, nullptr, c);
      EXPECT_EQ(trace.steps.size(), 3u);
      if (*trace.selected == ModelSpec::parse("edges")) ++edges_only;
    } catch (const Error&) {
    }
  }
  EXPECT_GT(edges_only, 10);

  const Graph g = bernoulli_graph(6, 0.5, 77);
  SelectionControl c;
  c.fitter = exact_fitter();
  CandidateSet cs = candidates("edges,gwesp:0.75,twopath");
  cs.strategy = AicStrategy::exhaustive;
  EXPECT_EQ(aic_select(cs, g, nullptr, c).steps.size(), 7u);
}

TEST(AicSelection, StepwiseMonotone) {
  for (std::uint64_t rep = 0; rep < 8; ++rep) {
    const Graph g = bernoulli_graph(6, 0.5, 40 + rep);
    SelectionControl c;
    c.seed = rep;
    c.fitter = exact_fitter();
    SelectionTrace trace;
    try {
      trace = aic_select(candidates("edges,gwesp:0.75,twopath,gwnsp:0.75"), g, nullptr, c);
    } catch (const NonConvergenceError&) {
      continue;
    }
    double prev = INFINITY;
    for (std::size_t idx : trace.order) {
      ASSERT_TRUE(trace.steps[idx].fit);
      EXPECT_LE(trace.steps[idx].fit->aic, prev);
      prev = trace.steps[idx].fit->aic;
    }
    EXPECT_TRUE(trace.steps[trace.order.back()].final_step);
  }
}

TEST(AicSelection, SingleCandidate) {
  const Graph g = bernoulli_graph(6, 0.5, 3);
  SelectionControl c;
  c.fitter = exact_fitter();
  const auto trace = aic_select(candidates("edges"), g, nullptr, c);
  EXPECT_EQ(trace.steps.size(), 1u);
  EXPECT_EQ(*trace.selected, ModelSpec::parse("edges"));
}

TEST(Selection, TracesReplay) {
  const Graph g = bernoulli_graph(20, 0.2, 8);
  auto c = fast_mcmc(12);
  const auto cs = candidates("edges,twopath,gwesp:0.75");
  EXPECT_EQ(backward_pvalue_select(cs, g, nullptr, c), backward_pvalue_select(cs, g, nullptr, c));
  EXPECT_EQ(aic_select(cs, g, nullptr, c), aic_select(cs, g, nullptr, c));
}

TEST(Graphical, DefaultFamily) {
  EXPECT_EQ(graphical_default_models(0.75, nullptr).size(), 16u);
  const auto attrs = NodeAttributes::from_labels("side", std::vector<std::string>{"L", "R"});
  const auto all = graphical_default_models(0.75, &attrs);
  EXPECT_EQ(all.size(), 32u);
  for (const auto& m : all) {
    EXPECT_EQ(m.terms[0].kind, TermKind::edges);
    EXPECT_NE(m.index_of(TermKind::gwesp).has_value(), m.index_of(TermKind::gwdsp).has_value());
  }
}

TEST(Graphical, RanksGeneratingModelFirst) {
  SamplerControl sc;
  sc.seed = 4;
  sc.sample_count = 1;
  sc.burn_in = 400'000;
  const std::vector<double> theta{-3.0, 0.8, -0.3};
  const Graph g = sample(ModelSpec::best_assessment(), theta, 60, nullptr, sc).graphs.front();
  auto c = fast_mcmc(9);
  c.fitter = mple_fitter();
  const std::vector<ModelSpec> models{ModelSpec::parse("edges"), ModelSpec::best_assessment()};
  const auto trace = graphical_rank(CandidateSet{}, g, nullptr, c, models);
  ASSERT_EQ(trace.order.size(), 2u);
  EXPECT_EQ(trace.order.front(), 1u);
  EXPECT_LT(trace.steps[0].gof->panel("esp").coverage, trace.steps[1].gof->panel("esp").coverage);

  const std::vector<ModelSpec> one{ModelSpec::parse("edges")};
  EXPECT_EQ(graphical_rank(CandidateSet{}, g, nullptr, c, one).order.size(), 1u);

  const std::vector<ModelSpec> twins{ModelSpec::best_assessment(), ModelSpec::best_assessment()};
  const auto t2 = graphical_rank(CandidateSet{}, g, nullptr, c, twins);
  EXPECT_NEAR(t2.steps[0].score, t2.steps[1].score, 0.25);
  if (t2.steps[0].score == t2.steps[1].score) EXPECT_EQ(t2.order, (std::vector<std::size_t>{0, 1}));
}

TEST(GroupCompare, TableFourSummary) {
  const std::vector<CoordinateSummary> younger{{-2.45, 0.395, 5}, {0.89, 0.181, 5}, {-0.32, 0.00662, 5}};
  const std::vector<CoordinateSummary> older{{-3.09, 0.347, 5}, {1.14, 0.153, 5}, {-0.24, 0.00479, 5}};
  const std::vector<std::string> terms{"Edges", "GWESP", "GWNSP"};
  for (bool pooled : {false, true}) {
    const auto cmp = group_compare(younger, older, terms, pooled);
    ASSERT_EQ(cmp.coordinates.size(), 3u);
    EXPECT_NEAR(cmp.coordinates[0].p, 0.2626, 0.03);
    EXPECT_NEAR(cmp.coordinates[1].p, 0.3339, 0.03);
    EXPECT_LT(cmp.coordinates[2].p, 0.001);
    EXPECT_EQ(cmp.coordinates[0].term, "Edges");
  }
  // hand calculation: t = 0.64 / sqrt(0.395^2 + 0.347^2)
  const auto welch = group_compare(younger, older, terms);
  EXPECT_NEAR(welch.coordinates[0].t, 0.64 / std::hypot(0.395, 0.347), 1e-12);
  const double vx = 0.395 * 0.395, vy = 0.347 * 0.347;
  EXPECT_NEAR(welch.coordinates[0].df, (vx + vy) * (vx + vy) / (vx * vx / 4 + vy * vy / 4), 1e-12);
  EXPECT_EQ(group_compare(younger, older, terms, true).coordinates[0].df, 8.0);
}

TEST(GroupCompare, FromFits) {
  auto fits = [](std::vector<double> values) {
    std::vector<FitResult> out;
    for (double v : values) {
      FitResult f;
      f.model = ModelSpec::parse("edges");
      f.theta = {v};
      out.push_back(f);
    }
    return out;
  };
  const auto a = fits({0.1, 0.2, 0.3, 0.4, 0.5});
  const auto same = group_compare(a, a);
  EXPECT_EQ(same.coordinates[0].t, 0.0);
  EXPECT_DOUBLE_EQ(same.coordinates[0].p, 1.0);
  const auto b = fits({1.001, 0.999, 1.0, 1.002, 0.998});
  const auto zero = fits({0.001, -0.001, 0.0, 0.002, -0.002});
  EXPECT_LT(group_compare(zero, b).coordinates[0].p, 1e-6);
  EXPECT_THROW(group_compare(fits({1.0}), b), DataError);
  auto other = b;
  for (auto& f : other) f.model = ModelSpec::parse("twopath");
  EXPECT_THROW(group_compare(a, other), ModelError);
}

TEST(Profiles, AverageAndSimulate) {
  FitResult f;
  f.model = ModelSpec::best_assessment();
  f.theta = {-2.45, 0.89, -0.32};
  const std::vector<FitResult> five(5, f);
  EXPECT_EQ(average_profile(five), f.theta);
  FitResult neg = f;
  for (double& x : neg.theta) x = -x;
  const std::vector<FitResult> pm{f, neg};
  for (double x : average_profile(pm)) EXPECT_EQ(x, 0.0);
  FitResult other = f;
  other.model = ModelSpec::parse("edges,gwesp:0.75");
  other.theta = {1, 2};
  const std::vector<FitResult> mixed{f, other};
  EXPECT_THROW(average_profile(mixed), ModelError);

  SamplerControl sc;
  sc.sample_count = 5;
  sc.burn_in = 5000;
  sc.interval = 500;
  const auto batch = representative_simulate(f.model, average_profile(five), 40, nullptr, sc);
  EXPECT_EQ(batch.graphs.size(), 5u);
}
