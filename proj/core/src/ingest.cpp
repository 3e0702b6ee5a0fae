#include "brainergm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "brainergm/errors.hpp"

namespace brainergm {

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<std::string_view> tokens;
};

/// Splits text into non-empty, non-comment lines of tokens separated by
/// whitespace and/or commas.
std::vector<Row> tokenize(std::string_view text) {
  std::vector<Row> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Row row{line_no, {}};
    std::size_t k = 0;
    while (k < line.size()) {
      while (k < line.size() && (std::isspace(static_cast<unsigned char>(line[k])) || line[k] == ',')) ++k;
      const std::size_t start = k;
      while (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])) && line[k] != ',') ++k;
      if (k > start) row.tokens.push_back(line.substr(start, k - start));
    }
    if (!row.tokens.empty()) rows.push_back(std::move(row));
    if (eol >= text.size()) break;
  }
  return rows;
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(std::string(s), &used);
    return used == s.size();
  } catch (const std::exception&) {
    // stod throws out_of_range for subnormals; treat "nan" etc. via the caller.
    return false;
  }
}

bool looks_like_matrix(const std::vector<Row>& rows) {
  if (rows.empty() || rows.front().tokens.size() == 1) return false;
  const std::size_t k = rows.front().tokens.size();
  if (rows.size() != k) return false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].tokens.size() != k) return false;
    for (std::size_t c = 0; c < k; ++c) {
      const auto t = rows[r].tokens[c];
      if (t != "0" && t != "1") return false;
      if (r == c && t != "0") return false;
    }
  }
  return true;
}

Graph parse_matrix(const std::vector<Row>& rows, std::vector<std::string>* warnings) {
  const std::size_t n = rows.size();
  for (const Row& r : rows)
    if (r.tokens.size() != n)
      throw DataError("adjacency matrix is not square: line " + std::to_string(r.line) + " has " +
                      std::to_string(r.tokens.size()) + " entries, expected " + std::to_string(n));
  Graph g(n);
  bool asymmetric = false;
  std::vector<std::uint8_t> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto t = rows[i].tokens[j];
      if (t != "0" && t != "1")
        throw DataError("adjacency matrix entry at row " + std::to_string(i) + ", column " +
                        std::to_string(j) + " is '" + std::string(t) + "' (expected 0 or 1)");
      a[i * n + j] = t == "1";
    }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a[i * n + j] != a[j * n + i]) asymmetric = true;
      if (a[i * n + j] || a[j * n + i]) g.toggle_unchecked(static_cast<Node>(i), static_cast<Node>(j));
    }
  if (asymmetric && warnings)
    warnings->push_back("adjacency matrix is asymmetric; symmetrized by logical OR");
  return g;
}

Graph parse_edge_rows(const std::vector<Row>& rows) {
  std::optional<std::size_t> declared;
  std::size_t first = 0;
  if (!rows.empty() && rows.front().tokens.size() == 1) {
    std::size_t n = 0;
    if (!parse_size(rows.front().tokens[0], n))
      throw DataError("line " + std::to_string(rows.front().line) + ": node count '" +
                      std::string(rows.front().tokens[0]) + "' is not a non-negative integer");
    declared = n;
    first = 1;
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t max_node = 0;
  for (std::size_t r = first; r < rows.size(); ++r) {
    const Row& row = rows[r];
    std::size_t a = 0, b = 0;
    if (row.tokens.size() != 2 || !parse_size(row.tokens[0], a) || !parse_size(row.tokens[1], b))
      throw DataError("line " + std::to_string(row.line) + ": expected two node ids 'i j'");
    edges.emplace_back(a, b);
    max_node = std::max({max_node, a, b});
  }
  const std::size_t n = declared ? *declared : (edges.empty() ? 0 : max_node + 1);
  return Graph::from_edges(n, edges);
}

}  // namespace

NetworkFormat parse_network_format(std::string_view text) {
  if (text == "auto" || text.empty()) return NetworkFormat::automatic;
  if (text == "matrix" || text == "adjacency-matrix") return NetworkFormat::matrix;
  if (text == "edgelist" || text == "edge-list") return NetworkFormat::edge_list;
  throw DataError("unknown network format '" + std::string(text) + "'");
}

Graph parse_network(std::string_view text, NetworkFormat format, std::vector<std::string>* warnings) {
  const auto rows = tokenize(text);
  if (format == NetworkFormat::automatic)
    format = looks_like_matrix(rows) ? NetworkFormat::matrix : NetworkFormat::edge_list;
  if (format == NetworkFormat::matrix) return parse_matrix(rows, warnings);
  return parse_edge_rows(rows);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Graph read_network(const std::filesystem::path& path, NetworkFormat format, std::vector<std::string>* warnings) {
  try {
    return parse_network(read_text_file(path), format, warnings);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream os;
  os << "# undirected edge list; first line is the node count\n" << g.node_count() << '\n';
  for (const Edge& e : g.edges()) os << e.u << ' ' << e.v << '\n';
  return os.str();
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << format_edge_list(g);
}

NodeAttributes parse_attributes(std::string_view text, std::optional<std::size_t> expected_nodes) {
  const auto rows = tokenize(text);
  if (rows.empty() || rows.front().tokens.size() != 2 || rows.front().tokens[0] != "node")
    throw DataError("attribute file must start with a header 'node,<attribute>'");
  const std::string name(rows.front().tokens[1]);
  std::map<std::size_t, std::string> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Row& row = rows[r];
    std::size_t id = 0;
    if (row.tokens.size() != 2 || !parse_size(row.tokens[0], id))
      throw DataError("line " + std::to_string(row.line) + ": expected 'node,label'");
    if (!labels.emplace(id, std::string(row.tokens[1])).second)
      throw DataError("line " + std::to_string(row.line) + ": duplicate node " + std::to_string(id));
  }
  const std::size_t n = expected_nodes ? *expected_nodes : (labels.empty() ? 0 : labels.rbegin()->first + 1);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < n; ++i)
    if (!labels.contains(i)) missing.push_back(i);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t k = 0; k < missing.size(); ++k) list += (k ? "," : "") + std::to_string(missing[k]);
    throw DataError("attribute '" + name + "' is missing nodes " + list);
  }
  if (!labels.empty() && labels.rbegin()->first >= n)
    throw DataError("attribute '" + name + "' labels node " + std::to_string(labels.rbegin()->first) +
                    " but the network has " + std::to_string(n) + " nodes");
  std::vector<std::string> values;
  values.reserve(n);
  for (auto& [id, label] : labels) values.push_back(std::move(label));
  return NodeAttributes::from_labels(name, values);
}

NodeAttributes read_attributes(const std::filesystem::path& path, std::optional<std::size_t> expected_nodes) {
  try {
    return parse_attributes(read_text_file(path), expected_nodes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

WeightMatrix::WeightMatrix(std::size_t n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw DataError("weight matrix has the wrong number of entries");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) {
      if (i == j) continue;
      const double v = values_[i * n_ + j];
      if (!std::isfinite(v))
        throw DataError("weight matrix entry (" + std::to_string(i) + "," + std::to_string(j) + ") is not finite");
      if (std::abs(v - values_[j * n_ + i]) > 1e-9)
        throw DataError("weight matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

WeightMatrix parse_weights(std::string_view text) {
  const auto rows = tokenize(text);
  const std::size_t n = rows.size();
  std::vector<double> values;
  values.reserve(n * n);
  for (const Row& r : rows) {
    if (r.tokens.size() != n)
      throw DataError("weight matrix is not square: line " + std::to_string(r.line) + " has " +
                      std::to_string(r.tokens.size()) + " entries, expected " + std::to_string(n));
    for (auto t : r.tokens) {
      double v = 0.0;
      if (!parse_double(t, v))
        throw DataError("line " + std::to_string(r.line) + ": weight '" + std::string(t) + "' is not a number");
      values.push_back(v);
    }
  }
  return WeightMatrix(n, std::move(values));
}

WeightMatrix read_weights(const std::filesystem::path& path) {
  try {
    return parse_weights(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

ThresholdResult threshold_matrix(const WeightMatrix& w, double s_target, bool absolute) {
  const std::size_t n = w.size();
  if (n < 3) throw DataError("thresholding needs at least 3 nodes");
  if (!(s_target > 1.0)) throw DataError("target S must be greater than 1");

  std::vector<double> weights;
  weights.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) weights.push_back(absolute ? std::abs(w(i, j)) : w(i, j));
  std::sort(weights.begin(), weights.end(), std::greater<>());
  if (weights.front() == weights.back())
    throw DataError("all off-diagonal weights are equal; no threshold separates edges");

  ThresholdResult out;
  out.target_k = std::pow(static_cast<double>(n), 1.0 / s_target);
  const double nn = static_cast<double>(n);

  // Threshold at each distinct weight keeps only strictly larger weights;
  // one step below the minimum keeps everything.
  double best_gap = INFINITY;
  std::size_t best_edges = 0;
  double best_threshold = weights.front();
  std::size_t k = 0;
  while (true) {
    const double candidate = k < weights.size() ? weights[k] : std::nextafter(weights.back(), -INFINITY);
    const std::size_t edges = k;  // weights[0..k) are strictly above candidate
    const double gap = std::abs(2.0 * static_cast<double>(edges) / nn - out.target_k);
    if (gap < best_gap) {  // strict: ties keep the sparser graph found first
      best_gap = gap;
      best_edges = edges;
      best_threshold = candidate;
    }
    if (k >= weights.size()) break;
    const double v = weights[k];
    while (k < weights.size() && weights[k] == v) ++k;
  }

  out.threshold = best_threshold;
  out.graph = Graph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = absolute ? std::abs(w(i, j)) : w(i, j);
      if (v > best_threshold) out.graph.toggle_unchecked(static_cast<Node>(i), static_cast<Node>(j));
    }
  if (out.graph.edge_count() != best_edges)
    throw Error(ErrorClass::internal, "threshold edge count mismatch");
  out.achieved_k = 2.0 * static_cast<double>(best_edges) / nn;
  out.achieved_s = out.achieved_k > 1.0 ? std::log(nn) / std::log(out.achieved_k) : NAN;
  return out;
}

}  // namespace brainergm
