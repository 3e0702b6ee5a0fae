#pragma once

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "brainergm/graph.hpp"

namespace brainergm {

enum class NetworkFormat { automatic, matrix, edge_list };

NetworkFormat parse_network_format(std::string_view text);

/// Parses a network from text.
///
/// Matrix format: square 0/1 matrix, whitespace or comma separated; an
/// asymmetric matrix is symmetrized by logical OR and a warning is appended.
/// Edge-list format: `i j` per line, 0-based, `#` comments; an optional
/// first line holding a single integer gives the node count (otherwise the
/// largest endpoint + 1).
Graph parse_network(std::string_view text, NetworkFormat format = NetworkFormat::automatic,
                    std::vector<std::string>* warnings = nullptr);

Graph read_network(const std::filesystem::path& path, NetworkFormat format = NetworkFormat::automatic,
                   std::vector<std::string>* warnings = nullptr);

/// Edge-list text with a node-count header; parse_network() reads it back.
std::string format_edge_list(const Graph& g);
void write_edge_list(const Graph& g, const std::filesystem::path& path);

/// CSV with header `node,<attribute>` and one `id,label` row per node.
/// `expected_nodes` (when given) must be covered exactly.
NodeAttributes parse_attributes(std::string_view text, std::optional<std::size_t> expected_nodes = std::nullopt);
NodeAttributes read_attributes(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_nodes = std::nullopt);

/// Symmetric real association matrix; the diagonal is ignored.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

WeightMatrix parse_weights(std::string_view text);
WeightMatrix read_weights(const std::filesystem::path& path);

struct ThresholdResult {
  double threshold = 0.0;  // edges are pairs with weight strictly above this
  Graph graph;
  double target_k = 0.0;
  double achieved_k = 0.0;
  double achieved_s = NAN;  // log(n) / log(K); NaN when K <= 1
};

/// Picks the threshold whose mean degree is closest to n^(1/s_target),
/// preferring the sparser graph on ties. `absolute` thresholds |w|.
ThresholdResult threshold_matrix(const WeightMatrix& w, double s_target, bool absolute = false);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace brainergm
