#include "brainergm/graph.hpp"

#include <algorithm>
#include <sstream>

#include "brainergm/errors.hpp"

namespace brainergm {

Graph::Graph(std::size_t n)
    : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0), degree_(n, 0) {}

Graph Graph::from_edges(std::size_t n,
                        std::span<const std::pair<std::size_t, std::size_t>> edges) {
  Graph g(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n) {
      std::ostringstream os;
      os << "edge (" << a << "," << b << ") has an endpoint outside 0.." << (n == 0 ? 0 : n - 1);
      throw DataError(os.str());
    }
    if (a == b) {
      std::ostringstream os;
      os << "self-loop (" << a << "," << b << ") is not allowed";
      throw DataError(os.str());
    }
    g.set_edge(static_cast<Node>(a), static_cast<Node>(b), true);
  }
  return g;
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(edges.size());
  for (const Edge& e : edges) pairs.emplace_back(e.u, e.v);
  return from_edges(n, pairs);
}

double Graph::density() const noexcept {
  const std::size_t d = dyad_count();
  return d == 0 ? 0.0 : static_cast<double>(m_) / static_cast<double>(d);
}

void Graph::check_pair(Node i, Node j) const {
  if (i >= n_ || j >= n_) {
    std::ostringstream os;
    os << "dyad (" << i << "," << j << ") out of range for n=" << n_;
    throw DataError(os.str());
  }
  if (i == j) {
    std::ostringstream os;
    os << "dyad (" << i << "," << j << ") is a self-loop";
    throw DataError(os.str());
  }
}

bool Graph::toggle(Node i, Node j) {
  check_pair(i, j);
  return toggle_unchecked(i, j);
}

bool Graph::toggle_unchecked(Node i, Node j) noexcept {
  const std::uint64_t mi = std::uint64_t{1} << (j & 63);
  const std::uint64_t mj = std::uint64_t{1} << (i & 63);
  std::uint64_t& wi = bits_[i * words_ + (j >> 6)];
  std::uint64_t& wj = bits_[j * words_ + (i >> 6)];
  wi ^= mi;
  wj ^= mj;
  if (wi & mi) {
    ++degree_[i];
    ++degree_[j];
    ++m_;
    return true;
  }
  --degree_[i];
  --degree_[j];
  --m_;
  return false;
}

void Graph::set_edge(Node i, Node j, bool present) {
  check_pair(i, j);
  if (has_edge(i, j) != present) toggle_unchecked(i, j);
}

std::vector<Node> Graph::neighbors(Node i) const {
  std::vector<Node> out;
  out.reserve(degree_[i]);
  for_each_neighbor(i, [&](Node k) { out.push_back(k); });
  return out;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(m_);
  for (Node i = 0; i < n_; ++i) {
    for_each_neighbor(i, [&](Node k) {
      if (k > i) out.push_back({i, k});
    });
  }
  return out;
}

NodeAttributes NodeAttributes::from_labels(std::string name, std::span<const std::string> labels) {
  NodeAttributes a;
  a.name = std::move(name);
  a.codes.reserve(labels.size());
  for (const std::string& l : labels) {
    if (l.empty()) throw DataError("attribute '" + a.name + "' has an empty label");
    if (l == kUnknownLabel) {
      a.codes.push_back(kUnknown);
      continue;
    }
    auto it = std::find(a.alphabet.begin(), a.alphabet.end(), l);
    if (it == a.alphabet.end()) {
      a.alphabet.push_back(l);
      a.codes.push_back(static_cast<int>(a.alphabet.size() - 1));
    } else {
      a.codes.push_back(static_cast<int>(it - a.alphabet.begin()));
    }
  }
  return a;
}

std::string NodeAttributes::label(Node i) const {
  const int c = codes.at(i);
  return c == kUnknown ? std::string(kUnknownLabel) : alphabet.at(static_cast<std::size_t>(c));
}

SharedPartnerDistributions shared_partner_distributions(const Graph& g) {
  const std::size_t n = g.node_count();
  const std::size_t bins = n >= 2 ? n - 1 : 1;
  SharedPartnerDistributions d{std::vector<std::int64_t>(bins, 0),
                               std::vector<std::int64_t>(bins, 0),
                               std::vector<std::int64_t>(bins, 0)};
  for (Node i = 0; i < n; ++i) {
    for (Node j = i + 1; j < n; ++j) {
      const auto sp = g.common_neighbors(i, j);
      (g.has_edge(i, j) ? d.esp : d.nsp)[sp] += 1;
      d.dsp[sp] += 1;
    }
  }
  return d;
}

std::vector<std::int64_t> degree_distribution(const Graph& g) {
  std::vector<std::int64_t> out(g.node_count(), 0);
  for (auto deg : g.degrees()) out[deg] += 1;
  return out;
}

std::int64_t GeodesicDistribution::total() const noexcept {
  std::int64_t t = unreachable;
  for (auto c : by_distance) t += c;
  return t;
}

std::vector<int> bfs_distances(const Graph& g, Node source) {
  std::vector<int> dist(g.node_count(), -1);
  std::vector<Node> frontier{source};
  std::vector<Node> next;
  dist[source] = 0;
  int level = 0;
  while (!frontier.empty()) {
    ++level;
    next.clear();
    for (Node u : frontier) {
      g.for_each_neighbor(u, [&](Node v) {
        if (dist[v] < 0) {
          dist[v] = level;
          next.push_back(v);
        }
      });
    }
    frontier.swap(next);
  }
  return dist;
}

GeodesicDistribution geodesic_distribution(const Graph& g) {
  const std::size_t n = g.node_count();
  GeodesicDistribution out;
  out.by_distance.assign(n > 0 ? n : 1, 0);
  for (Node s = 0; s < n; ++s) {
    const auto dist = bfs_distances(g, s);
    for (Node t = s + 1; t < n; ++t) {
      if (dist[t] < 0)
        ++out.unreachable;
      else
        ++out.by_distance[static_cast<std::size_t>(dist[t])];
    }
  }
  return out;
}

std::int64_t triangle_count(const Graph& g) {
  std::int64_t t = 0;
  for (const Edge& e : g.edges()) t += g.common_neighbors(e.u, e.v);
  return t / 3;
}

TriadCensus triad_census(const Graph& g) {
  const auto n = static_cast<std::int64_t>(g.node_count());
  const auto m = static_cast<std::int64_t>(g.edge_count());
  const std::int64_t total = n < 3 ? 0 : n * (n - 1) * (n - 2) / 6;
  const std::int64_t t3 = triangle_count(g);
  std::int64_t two_paths = 0;
  for (auto d : g.degrees()) two_paths += static_cast<std::int64_t>(d) * (d - 1) / 2;
  const std::int64_t t2 = two_paths - 3 * t3;
  const std::int64_t t1 = n < 3 ? 0 : m * (n - 2) - 2 * t2 - 3 * t3;
  return {total - t1 - t2 - t3, t1, t2, t3};
}

}  // namespace brainergm
