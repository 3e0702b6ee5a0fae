#pragma once

// Brute-force reference implementations written straight from the textbook
// definitions. They share nothing with the library beyond the Graph type
// used to read the adjacency matrix, and are deliberately slow.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "brainergm/graph.hpp"
#include "brainergm/terms.hpp"

namespace oracle {

using Adj = std::vector<std::vector<int>>;

inline Adj adjacency(const brainergm::Graph& g) {
  const std::size_t n = g.node_count();
  Adj a(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && g.has_edge(static_cast<brainergm::Node>(i), static_cast<brainergm::Node>(j))) a[i][j] = 1;
  return a;
}

inline brainergm::Graph graph_of(const Adj& a) {
  brainergm::Graph g(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i][j]) g.set_edge(static_cast<brainergm::Node>(i), static_cast<brainergm::Node>(j), true);
  return g;
}

inline brainergm::Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Adj a(n, std::vector<int>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a[i][j] = a[j][i] = coin(rng) ? 1 : 0;
  return graph_of(a);
}

inline int degree(const Adj& a, std::size_t i) {
  int d = 0;
  for (int x : a[i]) d += x;
  return d;
}

inline int shared_partners(const Adj& a, std::size_t i, std::size_t j) {
  int s = 0;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (k != i && k != j && a[i][k] && a[j][k]) ++s;
  return s;
}

inline double gw_weight(double tau, int count) {
  return std::exp(tau) * (1.0 - std::pow(1.0 - std::exp(-tau), count));
}

inline std::int64_t triangles(const Adj& a) {
  std::int64_t t = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) t += a[i][j] && a[j][k] && a[i][k];
  return t;
}

inline std::int64_t four_cycles(const Adj& a) {
  std::int64_t c = 0;
  const std::size_t n = a.size();
  auto cyc = [&](std::size_t p, std::size_t q, std::size_t r, std::size_t s) {
    return a[p][q] && a[q][r] && a[r][s] && a[s][p];
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) c += cyc(i, j, k, l) + cyc(i, j, l, k) + cyc(i, k, j, l);
  return c;
}

/// One term evaluated from its definition. `labels` holds attribute codes
/// (-1 = unknown, never matches).
inline double term_value(const brainergm::TermSpec& t, const Adj& a, const std::vector<int>* labels = nullptr) {
  using brainergm::TermKind;
  const std::size_t n = a.size();
  double v = 0.0;
  switch (t.kind) {
    case TermKind::edges:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) v += a[i][j];
      break;
    case TermKind::two_path:
      // paths i-k-j with i < j, counted once per centre k
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) v += (i != k && j != k && a[i][k] && a[k][j]) ? 1 : 0;
      break;
    case TermKind::k_cycle:
      v = static_cast<double>(t.k == 3 ? triangles(a) : four_cycles(a));
      break;
    case TermKind::k_degree:
      for (std::size_t i = 0; i < n; ++i) v += degree(a, i) == t.k;
      break;
    case TermKind::gwd:
      for (std::size_t i = 0; i < n; ++i) v += gw_weight(t.decay, degree(a, i));
      break;
    case TermKind::gwesp:
    case TermKind::gwnsp:
    case TermKind::gwdsp:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          if (t.kind == TermKind::gwesp && !a[i][j]) continue;
          if (t.kind == TermKind::gwnsp && a[i][j]) continue;
          v += gw_weight(t.decay, shared_partners(a, i, j));
        }
      break;
    case TermKind::nodematch:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          v += a[i][j] && (*labels)[i] >= 0 && (*labels)[i] == (*labels)[j];
      break;
  }
  return v;
}

inline std::vector<double> statistics(const brainergm::ModelSpec& m, const Adj& a,
                                      const std::vector<int>* labels = nullptr) {
  std::vector<double> out;
  for (const auto& t : m.terms) out.push_back(term_value(t, a, labels));
  return out;
}

/// esp/nsp/dsp count vectors indexed by shared-partner count 0..n-2.
struct SharedPartners {
  std::vector<std::int64_t> esp, nsp, dsp;
};

inline SharedPartners shared_partner_counts(const Adj& a) {
  const std::size_t n = a.size();
  SharedPartners s{std::vector<std::int64_t>(n > 1 ? n - 1 : 1), std::vector<std::int64_t>(n > 1 ? n - 1 : 1),
                   std::vector<std::int64_t>(n > 1 ? n - 1 : 1)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sp = shared_partners(a, i, j);
      ++s.dsp[sp];
      ++(a[i][j] ? s.esp : s.nsp)[sp];
    }
  return s;
}

/// All-pairs distances by Floyd-Warshall; unreachable = max int.
inline std::vector<std::vector<int>> distances(const Adj& a) {
  constexpr int inf = std::numeric_limits<int>::max() / 4;
  const std::size_t n = a.size();
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j]) d[i][j] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (auto& row : d)
    for (int& x : row)
      if (x >= inf) x = std::numeric_limits<int>::max();
  return d;
}

inline std::array<std::int64_t, 4> triad_census(const Adj& a) {
  std::array<std::int64_t, 4> c{};
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) ++c[a[i][j] + a[j][k] + a[i][k]];
  return c;
}

inline double global_efficiency(const Adj& a) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  const auto d = distances(a);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (d[i][j] != std::numeric_limits<int>::max()) s += 1.0 / d[i][j];
  return s / (n * (n - 1) / 2.0);
}

inline double clustering(const Adj& a) {
  const std::size_t n = a.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int triples = 0, closed = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        if (a[i][j] && a[i][k]) {
          ++triples;
          closed += a[j][k];
        }
    s += triples ? static_cast<double>(closed) / triples : 0.0;
  }
  return s / static_cast<double>(n);
}

inline double local_efficiency(const Adj& a) {
  const std::size_t n = a.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < n; ++j)
      if (a[i][j]) nb.push_back(j);
    if (nb.size() < 2) continue;
    Adj sub(nb.size(), std::vector<int>(nb.size(), 0));
    for (std::size_t p = 0; p < nb.size(); ++p)
      for (std::size_t q = 0; q < nb.size(); ++q) sub[p][q] = p != q && a[nb[p]][nb[q]];
    s += global_efficiency(sub);
  }
  return s / static_cast<double>(n);
}

/// Exact ERGM on n nodes by enumerating all 2^C(n,2) graphs (n <= 6).
class ExactErgm {
 public:
  ExactErgm(const brainergm::ModelSpec& m, std::size_t n) : p_(m.size()) {
    std::vector<std::pair<std::size_t, std::size_t>> dyads;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dyads.emplace_back(i, j);
    const std::uint64_t count = std::uint64_t{1} << dyads.size();
    stats_.resize(count, p_);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      Adj a(n, std::vector<int>(n, 0));
      for (std::size_t d = 0; d < dyads.size(); ++d)
        if (mask >> d & 1) a[dyads[d].first][dyads[d].second] = a[dyads[d].second][dyads[d].first] = 1;
      const auto s = statistics(m, a);
      for (std::size_t k = 0; k < p_; ++k) stats_(static_cast<Eigen::Index>(mask), static_cast<Eigen::Index>(k)) = s[k];
    }
  }

  double log_normalizer(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd e = stats_ * theta;
    const double mx = e.maxCoeff();
    return mx + std::log((e.array() - mx).exp().sum());
  }

  double loglik(const Eigen::VectorXd& theta, const Eigen::VectorXd& observed) const {
    return theta.dot(observed) - log_normalizer(theta);
  }

  /// Mean and covariance of g(Y) under theta.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> moments(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd e = stats_ * theta;
    Eigen::VectorXd w = (e.array() - e.maxCoeff()).exp();
    w /= w.sum();
    const Eigen::VectorXd mean = stats_.transpose() * w;
    const Eigen::MatrixXd centered = stats_.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * w.asDiagonal() * centered;
    return {mean, cov};
  }

  /// Newton-Raphson on the exact log-likelihood.
  Eigen::VectorXd mle(const Eigen::VectorXd& observed, Eigen::VectorXd theta) const {
    for (int it = 0; it < 200; ++it) {
      auto [mean, cov] = moments(theta);
      const Eigen::VectorXd step = cov.ldlt().solve(observed - mean);
      double scale = 1.0;
      const double base = loglik(theta, observed);
      while (scale > 1e-8 && loglik(theta + scale * step, observed) < base - 1e-12) scale /= 2;
      theta += scale * step;
      if (step.cwiseAbs().maxCoeff() * scale < 1e-12) break;
    }
    return theta;
  }

 private:
  std::size_t p_;
  Eigen::MatrixXd stats_;
};

}  // namespace oracle
