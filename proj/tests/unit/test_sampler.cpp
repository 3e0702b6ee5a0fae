#include <gtest/gtest.h>

#include <cmath>

#include "brainergm/errors.hpp"
#include "brainergm/sampler.hpp"
#include "oracle.hpp"

using namespace brainergm;

namespace {

double mean_density(const SampleBatch& b) {
  double s = 0.0;
  for (const auto& g : b.graphs) s += g.density();
  return s / static_cast<double>(b.graphs.size());
}

SamplerControl quick(std::uint64_t seed, std::uint64_t samples = 100) {
  SamplerControl c;
  c.seed = seed;
  c.burn_in = 20'000;
  c.interval = 2'000;
  c.sample_count = samples;
  return c;
}

}  // namespace

TEST(Sampler, ErdosRenyiDensities) {
  const ModelSpec edges = ModelSpec::parse("edges");
  const std::vector<double> half{0.0};
  EXPECT_NEAR(mean_density(sample(edges, half, 50, nullptr, quick(1))), 0.5, 0.02);
  const std::vector<double> fifth{std::log(0.2 / 0.8)};
  EXPECT_NEAR(mean_density(sample(edges, fifth, 50, nullptr, quick(2))), 0.2, 0.02);
}

TEST(Sampler, BernoulliEdgeCountMomentsWithinThreeSe) {
  const double p = 0.3;
  const std::size_t n = 30;
  const double dyads = n * (n - 1) / 2.0;
  const std::vector<double> theta{std::log(p / (1 - p))};
  for (auto proposal : {Proposal::tie_no_tie, Proposal::uniform_dyad}) {
    SamplerControl c = quick(5);
    c.proposal = proposal;
    const auto b = sample(ModelSpec::parse("edges"), theta, n, nullptr, c);
    double mean = 0, sq = 0;
    for (const auto& s : b.stat_trace) mean += s[0];
    mean /= 100.0;
    for (const auto& s : b.stat_trace) sq += (s[0] - mean) * (s[0] - mean);
    const double var = sq / 99.0;
    const double true_var = dyads * p * (1 - p);
    EXPECT_LT(std::abs(mean - dyads * p), 3.0 * std::sqrt(true_var / 100.0));
    // sample variance of 100 normals has sd ~ var * sqrt(2/99)
    EXPECT_LT(std::abs(var - true_var), 3.0 * true_var * std::sqrt(2.0 / 99.0));
  }
}

TEST(Sampler, StationaryDistributionMatchesEnumeration) {
  // Dependent model on n = 5: compare sampled moments with the exact ones.
  const ModelSpec model = ModelSpec::parse("edges,gwesp:0.75,twopath");
  const std::vector<double> theta{-0.4, 0.5, -0.15};
  const oracle::ExactErgm exact(model, 5);
  const auto [mean, cov] = exact.moments(Eigen::Map<const Eigen::VectorXd>(theta.data(), 3));
  for (auto proposal : {Proposal::tie_no_tie, Proposal::uniform_dyad}) {
    SamplerControl c;
    c.seed = 99;
    c.burn_in = 1000;
    c.interval = 25;
    c.sample_count = 20'000;
    c.proposal = proposal;
    c.keep_graphs = false;
    const auto b = sample(model, theta, 5, nullptr, c);
    const auto got = b.mean_statistics();
    for (Eigen::Index k = 0; k < 3; ++k) {
      // generous 5 sd band for autocorrelated draws
      const double se = std::sqrt(cov(k, k) / 20'000.0) * 2.0;
      EXPECT_NEAR(got[static_cast<std::size_t>(k)], mean(k), 5.0 * se) << "coordinate " << k;
    }
  }
}

TEST(Sampler, TraceRowsMatchGraphs) {
  const ModelSpec model = ModelSpec::parse("edges,gwesp:0.75,gwnsp:0.75,gwd:0.75,kcycle:4");
  const std::vector<double> theta{-2.0, 0.5, -0.1, -0.3, -0.05};
  SamplerControl c = quick(3, 30);
  c.verify_statistics = true;
  const auto b = sample(model, theta, 25, nullptr, c);
  ASSERT_EQ(b.graphs.size(), 30u);
  ASSERT_EQ(b.stat_trace.size(), 30u);
  for (std::size_t s = 0; s < b.graphs.size(); ++s) {
    const auto ref = evaluate_statistics(model, b.graphs[s]);
    for (std::size_t t = 0; t < ref.size(); ++t) EXPECT_NEAR(b.stat_trace[s][t], ref[t], 1e-9);
  }
  EXPECT_GT(b.acceptance_rate, 0.0);
  EXPECT_LE(b.acceptance_rate, 1.0);
}

TEST(Sampler, Reproducible) {
  const ModelSpec model = ModelSpec::best_assessment();
  const std::vector<double> theta{-2.5, 0.6, -0.2};
  const auto a = sample(model, theta, 30, nullptr, quick(42, 10));
  const auto b = sample(model, theta, 30, nullptr, quick(42, 10));
  EXPECT_EQ(a.graphs, b.graphs);
  EXPECT_EQ(a.stat_trace, b.stat_trace);
  const auto c = sample(model, theta, 30, nullptr, quick(43, 10));
  EXPECT_NE(a.stat_trace, c.stat_trace);
}

TEST(Sampler, ChainsIndependentOfThreadCount) {
  const ModelSpec model = ModelSpec::best_assessment();
  const std::vector<double> theta{-2.5, 0.6, -0.2};
  SamplerControl c = quick(8, 12);
  c.chains = 3;
  c.threads = 1;
  const auto one = sample(model, theta, 30, nullptr, c);
  c.threads = 3;
  const auto three = sample(model, theta, 30, nullptr, c);
  EXPECT_EQ(one.stat_trace, three.stat_trace);
  EXPECT_EQ(one.graphs, three.graphs);
  EXPECT_EQ(one.burn_in_traces.size(), 3u);
}

TEST(Sampler, DegeneracyDetected) {
  const ModelSpec tri = ModelSpec::parse("edges,kcycle:3");
  const std::vector<double> collapse{-1.0, 2.0};
  SamplerControl c = quick(4, 10);
  try {
    sample(tri, collapse, 30, nullptr, c);
    FAIL() << "expected degeneracy";
  } catch (const DegenerateModelError& e) {
    EXPECT_NE(std::string(e.what()).find("complete"), std::string::npos) << e.what();
  }
  c.fail_on_degeneracy = false;
  const auto b = sample(tri, collapse, 30, nullptr, c);
  EXPECT_TRUE(b.diagnostics.degenerate);

  const std::vector<double> empty{-20.0};
  const auto e = [&] {
    SamplerControl ce = quick(5, 10);
    ce.fail_on_degeneracy = false;
    return sample(ModelSpec::parse("edges"), empty, 30, nullptr, ce);
  }();
  EXPECT_TRUE(e.diagnostics.degenerate);
  EXPECT_EQ(e.diagnostics.code, "empty-graph-collapse");

  const std::vector<double> zero{0.0};
  EXPECT_FALSE(sample(ModelSpec::parse("edges"), zero, 30, nullptr, quick(6, 10)).diagnostics.degenerate);
}

TEST(Sampler, DegeneracyCheckOnTraces) {
  DensityTrace flat{std::vector<double>(100, 0.0), 100};
  EXPECT_EQ(degeneracy_check(flat).code, "empty-graph-collapse");
  DensityTrace full{std::vector<double>(100, 1.0), 100};
  EXPECT_EQ(degeneracy_check(full).code, "complete-graph-collapse");
  DensityTrace noisy;
  noisy.spacing = 100;
  for (int k = 0; k < 200; ++k) noisy.density.push_back(0.5 + 0.01 * ((k * 7) % 5 - 2));
  EXPECT_FALSE(degeneracy_check(noisy).degenerate);
}

TEST(Sampler, InvalidControl) {
  SamplerControl c;
  c.interval = 0;
  EXPECT_THROW(c.validate(), DataError);
  c = SamplerControl{};
  c.sample_count = 0;
  EXPECT_THROW(c.validate(), DataError);
  const std::vector<double> wrong{0.0, 1.0};
  EXPECT_THROW(sample(ModelSpec::parse("edges"), wrong, 10, nullptr, quick(1, 1)), Error);
}

TEST(Sampler, Cancellation) {
  std::atomic<bool> cancel{true};
  std::atomic<std::uint64_t> done{0};
  SamplerControl c = quick(1, 10);
  c.hooks = {&cancel, &done};
  const std::vector<double> theta{0.0};
  EXPECT_THROW(sample(ModelSpec::parse("edges"), theta, 20, nullptr, c), CancelledError);
}

TEST(Sampler, BernoulliGraph) {
  const Graph g = bernoulli_graph(200, 0.1, 3);
  EXPECT_NEAR(g.density(), 0.1, 0.01);
  EXPECT_EQ(g, bernoulli_graph(200, 0.1, 3));
}
