#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace brainergm {

using Node = std::uint32_t;

/// Unordered node pair, stored with u < v.
struct Edge {
  Node u = 0;
  Node v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on nodes 0..n-1.
///
/// Adjacency is held as one bit row per node, so membership tests are O(1)
/// and common-neighbour counts are a word-wise AND + popcount. Node counts
/// in this domain are ~10^2..10^3, which keeps the n^2/8 bytes affordable.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n);

  /// Builds a graph from a pair list; duplicates (in either orientation)
  /// collapse. Throws DataError on self-loops or out-of-range endpoints.
  static Graph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return m_; }
  std::size_t dyad_count() const noexcept { return n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2; }
  double density() const noexcept;

  bool has_edge(Node i, Node j) const noexcept {
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1u;
  }

  /// Flips dyad (i,j). Returns true if the edge is present afterwards.
  /// Throws DataError when i == j or either node is out of range.
  bool toggle(Node i, Node j);

  /// Same as toggle() without argument checks; used by the sampler.
  bool toggle_unchecked(Node i, Node j) noexcept;

  void set_edge(Node i, Node j, bool present);

  std::uint32_t degree(Node i) const noexcept { return degree_[i]; }
  std::span<const std::uint32_t> degrees() const noexcept { return degree_; }

  /// Number of nodes adjacent to both i and j.
  std::uint32_t common_neighbors(Node i, Node j) const noexcept {
    const std::uint64_t* a = row_ptr(i);
    const std::uint64_t* b = row_ptr(j);
    std::uint32_t c = 0;
    for (std::size_t w = 0; w < words_; ++w) c += std::popcount(a[w] & b[w]);
    return c;
  }

  template <typename F>
  void for_each_neighbor(Node i, F&& f) const {
    const std::uint64_t* r = row_ptr(i);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = r[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(static_cast<Node>(w * 64 + b));
        bits &= bits - 1;
      }
    }
  }

  /// Calls f(k) for every k adjacent to both i and j.
  template <typename F>
  void for_each_common_neighbor(Node i, Node j, F&& f) const {
    const std::uint64_t* a = row_ptr(i);
    const std::uint64_t* b = row_ptr(j);
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = a[w] & b[w];
      while (bits != 0) {
        const int bit = std::countr_zero(bits);
        f(static_cast<Node>(w * 64 + bit));
        bits &= bits - 1;
      }
    }
  }

  std::vector<Node> neighbors(Node i) const;

  /// Edges in lexicographic order.
  std::vector<Edge> edges() const;

  std::span<const std::uint64_t> row(Node i) const noexcept {
    return {row_ptr(i), words_};
  }
  std::size_t words_per_row() const noexcept { return words_; }

  friend bool operator==(const Graph& a, const Graph& b) noexcept {
    return a.n_ == b.n_ && a.bits_ == b.bits_;
  }

 private:
  const std::uint64_t* row_ptr(Node i) const noexcept { return bits_.data() + i * words_; }
  std::uint64_t* row_ptr(Node i) noexcept { return bits_.data() + i * words_; }
  void check_pair(Node i, Node j) const;

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t m_ = 0;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint32_t> degree_;
};

/// One categorical attribute over all nodes.
///
/// Labels are interned into `alphabet`; a node carrying the explicit
/// unknown label gets code kUnknown and never matches any node.
struct NodeAttributes {
  static constexpr int kUnknown = -1;
  static constexpr std::string_view kUnknownLabel = "NA";

  std::string name;
  std::vector<std::string> alphabet;
  std::vector<int> codes;

  static NodeAttributes from_labels(std::string name, std::span<const std::string> labels);

  std::size_t size() const noexcept { return codes.size(); }
  bool matches(Node i, Node j) const noexcept {
    return codes[i] != kUnknown && codes[i] == codes[j];
  }
  std::string label(Node i) const;
};

/// Counts of dyads by number of shared partners, indexed 0..n-2.
struct SharedPartnerDistributions {
  std::vector<std::int64_t> esp;  // connected pairs
  std::vector<std::int64_t> nsp;  // unconnected pairs
  std::vector<std::int64_t> dsp;  // all pairs
};

SharedPartnerDistributions shared_partner_distributions(const Graph& g);

/// Entry k = number of nodes of degree exactly k (length n).
std::vector<std::int64_t> degree_distribution(const Graph& g);

/// Pair counts by shortest-path length. by_distance[d] counts pairs at
/// distance d (index 0 is always zero); unreachable counts the rest.
struct GeodesicDistribution {
  std::vector<std::int64_t> by_distance;
  std::int64_t unreachable = 0;

  std::int64_t total() const noexcept;
};

GeodesicDistribution geodesic_distribution(const Graph& g);

/// Breadth-first distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, Node source);

/// Counts of node triples spanning 0, 1, 2 and 3 edges.
using TriadCensus = std::array<std::int64_t, 4>;

TriadCensus triad_census(const Graph& g);
std::int64_t triangle_count(const Graph& g);

}  // namespace brainergm
