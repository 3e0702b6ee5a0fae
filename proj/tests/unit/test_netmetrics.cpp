#include <gtest/gtest.h>

#include <random>

#include "brainergm/errors.hpp"
#include "brainergm/netmetrics.hpp"
#include "oracle.hpp"

using namespace brainergm;

TEST(NetMetrics, CompleteGraph) {
  Graph k4(4);
  for (Node i = 0; i < 4; ++i)
    for (Node j = i + 1; j < 4; ++j) k4.set_edge(i, j, true);
  const auto r = descriptive_metrics(k4);
  EXPECT_DOUBLE_EQ(r.clustering, 1.0);
  EXPECT_DOUBLE_EQ(r.path_length, 1.0);
  EXPECT_DOUBLE_EQ(r.local_efficiency, 1.0);
  EXPECT_DOUBLE_EQ(r.global_efficiency, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_degree, 3.0);
  EXPECT_DOUBLE_EQ(r.harmonic_path_length, 1.0);
}

TEST(NetMetrics, Star) {
  const Graph star = Graph::from_edges(5, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  const auto r = descriptive_metrics(star);
  EXPECT_DOUBLE_EQ(r.clustering, 0.0);
  EXPECT_DOUBLE_EQ(r.mean_degree, 1.6);
  EXPECT_DOUBLE_EQ(r.path_length, 1.6);
  EXPECT_DOUBLE_EQ(r.global_efficiency, 0.7);
  EXPECT_DOUBLE_EQ(r.local_efficiency, 0.0);
  EXPECT_DOUBLE_EQ(r.reachable_pair_fraction, 1.0);
}

TEST(NetMetrics, DisconnectedConventions) {
  const Graph g = Graph::from_edges(4, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 3}});
  const auto r = descriptive_metrics(g);
  EXPECT_DOUBLE_EQ(r.path_length, 1.0);
  EXPECT_DOUBLE_EQ(r.reachable_pair_fraction, 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.global_efficiency, 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.harmonic_path_length, 3.0);
  const auto e = descriptive_metrics(Graph(3));
  EXPECT_EQ(e.path_length, 0.0);
  EXPECT_TRUE(std::isinf(e.harmonic_path_length));
}

TEST(NetMetrics, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = 3 + rep % 8;
    const Graph g = oracle::random_graph(n, std::array{0.2, 0.45, 0.7}[rep % 3], rng);
    const auto a = oracle::adjacency(g);
    const auto r = descriptive_metrics(g);
    EXPECT_NEAR(r.clustering, oracle::clustering(a), 1e-12);
    EXPECT_NEAR(r.global_efficiency, oracle::global_efficiency(a), 1e-12);
    EXPECT_NEAR(r.local_efficiency, oracle::local_efficiency(a), 1e-12);
    EXPECT_GE(r.clustering, 0.0);
    EXPECT_LE(r.clustering, 1.0);
    if (r.reachable_pair_fraction > 0) EXPECT_GE(r.path_length, 1.0);
  }
}

TEST(NetMetrics, DeletingAnEdgeNeverRaisesGlobalEfficiency) {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 40; ++rep) {
    Graph g = oracle::random_graph(12, 0.3, rng);
    for (const Edge& e : g.edges()) {
      const double before = global_efficiency(g);
      g.toggle(e.u, e.v);
      EXPECT_LE(global_efficiency(g), before + 1e-15);
      g.toggle(e.u, e.v);
    }
  }
}

TEST(NetMetrics, Ensemble) {
  std::mt19937_64 rng(33);
  const Graph g = oracle::random_graph(15, 0.3, rng);
  const std::vector<Graph> same(4, g);
  const auto e = ensemble_metrics(same);
  EXPECT_EQ(e.se.clustering, 0.0);
  EXPECT_EQ(e.se.global_efficiency, 0.0);
  EXPECT_EQ(e.mean, descriptive_metrics(g));

  MetricReport a, b;
  a.clustering = 0.2;
  b.clustering = 0.6;
  const std::vector<MetricReport> two{a, b};
  const auto t = ensemble_metrics(two);
  EXPECT_NEAR(t.mean.clustering, 0.4, 1e-15);
  EXPECT_NEAR(t.se.clustering, 0.2, 1e-15);
  EXPECT_THROW(ensemble_metrics(std::span<const MetricReport>{}), DataError);
}
