#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "brainergm/graph.hpp"

namespace brainergm {

enum class TermKind {
  edges,
  two_path,
  k_cycle,
  k_degree,
  gwd,
  gwesp,
  gwnsp,
  gwdsp,
  nodematch,
};

inline constexpr double kDefaultDecay = 0.75;

/// One explanatory statistic of the model.
struct TermSpec {
  TermKind kind = TermKind::edges;
  double decay = kDefaultDecay;  // geometrically weighted terms only
  int k = 0;                     // k_cycle / k_degree only
  std::string attribute;         // nodematch only; empty = the supplied attribute

  static TermSpec edges() { return {TermKind::edges, kDefaultDecay, 0, {}}; }
  static TermSpec two_path() { return {TermKind::two_path, kDefaultDecay, 0, {}}; }
  static TermSpec k_cycle(int k) { return {TermKind::k_cycle, kDefaultDecay, k, {}}; }
  static TermSpec k_degree(int k) { return {TermKind::k_degree, kDefaultDecay, k, {}}; }
  static TermSpec gwd(double decay = kDefaultDecay) { return {TermKind::gwd, decay, 0, {}}; }
  static TermSpec gwesp(double decay = kDefaultDecay) { return {TermKind::gwesp, decay, 0, {}}; }
  static TermSpec gwnsp(double decay = kDefaultDecay) { return {TermKind::gwnsp, decay, 0, {}}; }
  static TermSpec gwdsp(double decay = kDefaultDecay) { return {TermKind::gwdsp, decay, 0, {}}; }
  static TermSpec nodematch(std::string attr = {}) {
    return {TermKind::nodematch, kDefaultDecay, 0, std::move(attr)};
  }

  bool is_geometric() const noexcept;
  bool is_dyad_independent() const noexcept;

  /// Grammar form, e.g. "gwesp:0.75"; parses back to an equal term.
  std::string to_string() const;
  /// Display name, e.g. "GWESP".
  std::string display_name() const;

  friend bool operator==(const TermSpec& a, const TermSpec& b);
};

/// Real vector aligned with ModelSpec::terms; used for both g(y) and theta.
using StatVector = std::vector<double>;

/// Ordered term list. Term order fixes the coordinate order of every
/// statistic and parameter vector built against the model.
struct ModelSpec {
  std::vector<TermSpec> terms;

  std::size_t size() const noexcept { return terms.size(); }
  std::optional<std::size_t> index_of(TermKind kind) const noexcept;
  bool is_dyad_independent() const noexcept;

  /// Parses `name[:param],...`, e.g. "edges,gwesp:0.75,nodematch:lobe".
  /// Geometric terms without a parameter use `default_decay`.
  static ModelSpec parse(std::string_view text, double default_decay = kDefaultDecay);
  std::string to_string() const;

  /// Edges + GWESP + GWNSP.
  static ModelSpec best_assessment(double decay = kDefaultDecay);
  /// The full candidate list: Edges, TwoPath, GWESP, GWDSP, GWNSP, GWD, Nodematch.
  static ModelSpec full_candidate(double decay = kDefaultDecay, std::string attribute = {});

  /// Model with term `index` removed.
  ModelSpec without(std::size_t index) const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct Diagnostic {
  std::string code;
  std::string message;
};

/// Returns an empty list when the model is usable on n nodes with `attrs`.
std::vector<Diagnostic> validate_model(const ModelSpec& model, std::size_t n,
                                       const NodeAttributes* attrs);

/// Throws ModelError carrying every diagnostic when validation fails.
void require_valid(const ModelSpec& model, std::size_t n, const NodeAttributes* attrs);

/// A model bound to a node count and attribute set, with the geometric
/// weight tables precomputed. Evaluation is const and thread-safe.
class CompiledModel {
 public:
  CompiledModel(ModelSpec model, std::size_t n, const NodeAttributes* attrs);

  const ModelSpec& spec() const noexcept { return model_; }
  std::size_t size() const noexcept { return model_.size(); }
  std::size_t node_count() const noexcept { return n_; }
  const NodeAttributes* attributes() const noexcept { return attrs_; }

  StatVector evaluate(const Graph& g) const;

  /// Writes g(y with ij present) - g(y with ij absent) into `out`,
  /// irrespective of the current state of (i,j).
  void change(const Graph& g, Node i, Node j, std::span<double> out) const;
  StatVector change(const Graph& g, Node i, Node j) const;

 private:
  struct Weights {
    std::vector<double> value;  // value[s] = e^t (1 - (1 - e^-t)^s)
    std::vector<double> step;   // step[s] = value[s+1] - value[s]
  };

  double gw_change(const Weights& w, TermKind kind, const Graph& g, Node i, Node j,
                   unsigned present) const;

  ModelSpec model_;
  std::size_t n_;
  const NodeAttributes* attrs_;
  std::vector<Weights> weights_;  // aligned with terms; empty for non-geometric
};

StatVector evaluate_statistics(const ModelSpec& model, const Graph& g,
                               const NodeAttributes* attrs = nullptr);
StatVector change_statistics(const ModelSpec& model, const Graph& g, Node i, Node j,
                             const NodeAttributes* attrs = nullptr);

double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace brainergm
