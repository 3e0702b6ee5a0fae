#include <gtest/gtest.h>

#include <cmath>

#include "brainergm/errors.hpp"
#include "brainergm/gof.hpp"
#include "oracle.hpp"

using namespace brainergm;

namespace {

Graph k3() {
  return Graph::from_edges(3, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {0, 2}});
}

}  // namespace

TEST(Gof, FiveNumberSummary) {
  // R: fivenum(c(1,2,3,4,5,6)) = 1 2 3.5 5 6; fivenum(1:5) = 1 2 3 4 5
  EXPECT_EQ(five_number_summary({6, 2, 4, 1, 5, 3}), (FiveNumber{1, 2, 3.5, 5, 6}));
  EXPECT_EQ(five_number_summary({1, 2, 3, 4, 5}), (FiveNumber{1, 2, 3, 4, 5}));
  EXPECT_EQ(five_number_summary({7}), (FiveNumber{7, 7, 7, 7, 7}));
  EXPECT_EQ(five_number_summary({1, 2, 3, 4}), (FiveNumber{1, 1.5, 2.5, 3.5, 4}));
}

TEST(Gof, ClampedLogit) {
  EXPECT_DOUBLE_EQ(clamped_logit(0.5, 0.01), 0.0);
  EXPECT_DOUBLE_EQ(clamped_logit(0.0, 0.01), std::log(0.01 / 0.99));
  EXPECT_DOUBLE_EQ(clamped_logit(1.0, 0.01), std::log(0.99 / 0.01));
  EXPECT_TRUE(std::isfinite(clamped_logit(0.0, 1e-6)));
}

TEST(Gof, IdenticalSimulationsScoreOne) {
  std::mt19937_64 rng(1);
  const Graph g = oracle::random_graph(12, 0.3, rng);
  const std::vector<Graph> sims(10, g);
  const auto r = gof_compare(g, sims);
  ASSERT_EQ(r.panels.size(), 4u);
  for (std::size_t p = 0; p < 4; ++p) EXPECT_EQ(r.panels[p].name, kGofPanels[p]);
  EXPECT_DOUBLE_EQ(r.overall_score, 1.0);
  EXPECT_EQ(r.panel("triad").bins.size(), 4u);
  EXPECT_EQ(r.panel("geodesic").bins.back().label, "NR");
}

TEST(Gof, K3Structure) {
  const std::vector<Graph> sims(5, k3());
  const auto r = gof_compare(k3(), sims);
  const auto& deg = r.panel("degree");
  ASSERT_EQ(deg.bins.size(), 3u);
  EXPECT_EQ(deg.bins[0].label, "0");
  EXPECT_EQ(deg.bins[2].label, "2");
  EXPECT_DOUBLE_EQ(deg.bins[2].observed, 1.0);
  EXPECT_DOUBLE_EQ(deg.epsilon, 1.0 / (2 * 3 * 5));
  for (const auto& b : deg.bins) {
    EXPECT_TRUE(std::isfinite(b.observed_logit));
    for (double x : b.simulated_logit) EXPECT_TRUE(std::isfinite(x));
  }
  EXPECT_THROW(r.panel("bogus"), DataError);
}

TEST(Gof, RelativeFrequenciesAndQuartileOrder) {
  std::mt19937_64 rng(2);
  const Graph obs = oracle::random_graph(20, 0.2, rng);
  std::vector<Graph> sims;
  for (int s = 0; s < 30; ++s) sims.push_back(oracle::random_graph(20, 0.1 + 0.01 * s, rng));
  const auto r = gof_compare(obs, sims);
  for (const auto& p : r.panels) {
    double total = 0;
    for (const auto& b : p.bins) {
      total += b.observed;
      for (std::size_t q = 0; q + 1 < 5; ++q) EXPECT_LE(b.simulated[q], b.simulated[q + 1]);
      EXPECT_EQ(b.covered, b.observed >= b.simulated[0] && b.observed <= b.simulated[4]);
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << p.name;
    EXPECT_GE(p.coverage, 0.0);
    EXPECT_LE(p.coverage, 1.0);
  }
  // each simulated network's frequencies sum to one per panel
  for (const auto& p : r.panels) {
    double med_total = 0;
    for (const auto& b : p.bins) med_total += b.simulated[0];
    EXPECT_LE(med_total, 1.0 + 1e-12);
  }
}

TEST(Gof, ScoreArithmetic) {
  GofReport r;
  for (auto name : kGofPanels) r.panels.push_back({std::string(name), {}, 0.0, 1.0});
  r.panels[0].coverage = 0.0;
  EXPECT_DOUBLE_EQ(gof_score(r), 0.75);
  const std::vector<double> w{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(gof_score(r, w), 1.0);
  const std::vector<double> bad{1, 1};
  EXPECT_THROW(gof_score(r, bad), DataError);
}

TEST(Gof, RunChecksFit) {
  std::mt19937_64 rng(3);
  const Graph g = oracle::random_graph(20, 0.2, rng);
  auto fit = mple(ModelSpec::parse("edges"), g);
  SamplerControl c = default_gof_control();
  EXPECT_EQ(c.sample_count, 100u);
  c.sample_count = 20;
  c.burn_in = 5000;
  c.interval = 500;
  const auto a = gof_run(fit, g, nullptr, c);
  const auto b = gof_run(fit, g, nullptr, c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.simulation_count, 20u);
  EXPECT_EQ(a.fit_reference, "mple:edges:seed=0");
  const Graph other = oracle::random_graph(21, 0.2, rng);
  EXPECT_THROW(gof_run(fit, other, nullptr, c), DataError);
  fit.converged = false;
  EXPECT_THROW(gof_run(fit, g, nullptr, c), NonConvergenceError);
}
