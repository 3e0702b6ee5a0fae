#include "brainergm/terms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "brainergm/errors.hpp"

namespace brainergm {

namespace {

// Shortest decimal form that parses back to the same double.
std::string format_decay(double d) {
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream s;
    s.precision(p);
    s << d;
    if (std::stod(s.str()) == d) return s.str();
  }
  return std::to_string(d);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_decay(std::string_view item, std::string_view text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ModelError("term '" + std::string(item) + "': decay '" + std::string(text) +
                     "' is not a number");
  }
}

int parse_int(std::string_view item, std::string_view text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ModelError("term '" + std::string(item) + "': '" + std::string(text) +
                     "' is not an integer");
  return v;
}

}  // namespace

bool operator==(const TermSpec& a, const TermSpec& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TermKind::k_cycle:
    case TermKind::k_degree:
      return a.k == b.k;
    case TermKind::gwd:
    case TermKind::gwesp:
    case TermKind::gwnsp:
    case TermKind::gwdsp:
      return a.decay == b.decay;
    case TermKind::nodematch:
      return a.attribute == b.attribute;
    default:
      return true;
  }
}

bool TermSpec::is_geometric() const noexcept {
  return kind == TermKind::gwd || kind == TermKind::gwesp || kind == TermKind::gwnsp ||
         kind == TermKind::gwdsp;
}

bool TermSpec::is_dyad_independent() const noexcept {
  return kind == TermKind::edges || kind == TermKind::nodematch;
}

std::string TermSpec::to_string() const {
  switch (kind) {
    case TermKind::edges: return "edges";
    case TermKind::two_path: return "twopath";
    case TermKind::k_cycle: return "kcycle:" + std::to_string(k);
    case TermKind::k_degree: return "kdegree:" + std::to_string(k);
    case TermKind::gwd: return "gwd:" + format_decay(decay);
    case TermKind::gwesp: return "gwesp:" + format_decay(decay);
    case TermKind::gwnsp: return "gwnsp:" + format_decay(decay);
    case TermKind::gwdsp: return "gwdsp:" + format_decay(decay);
    case TermKind::nodematch: return attribute.empty() ? "nodematch" : "nodematch:" + attribute;
  }
  return "?";
}

std::string TermSpec::display_name() const {
  switch (kind) {
    case TermKind::edges: return "Edges";
    case TermKind::two_path: return "Two-Path";
    case TermKind::k_cycle: return std::to_string(k) + "-Cycle";
    case TermKind::k_degree: return std::to_string(k) + "-Degree";
    case TermKind::gwd: return "GWD";
    case TermKind::gwesp: return "GWESP";
    case TermKind::gwnsp: return "GWNSP";
    case TermKind::gwdsp: return "GWDSP";
    case TermKind::nodematch: return "Nodematch";
  }
  return "?";
}

std::optional<std::size_t> ModelSpec::index_of(TermKind kind) const noexcept {
  for (std::size_t t = 0; t < terms.size(); ++t)
    if (terms[t].kind == kind) return t;
  return std::nullopt;
}

bool ModelSpec::is_dyad_independent() const noexcept {
  return std::all_of(terms.begin(), terms.end(),
                     [](const TermSpec& t) { return t.is_dyad_independent(); });
}

ModelSpec ModelSpec::parse(std::string_view text, double default_decay) {
  ModelSpec model;
  if (trim(text).empty()) return model;
  std::size_t pos = 0;
  for (bool last = false; !last;) {
    std::size_t comma = text.find(',', pos);
    last = comma == std::string_view::npos;
    if (last) comma = text.size();
    const std::string_view item = trim(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) throw ModelError("empty term in list '" + std::string(text) + "'");
    const std::size_t colon = item.find(':');
    const std::string name = lower(trim(item.substr(0, colon)));
    const bool param = colon != std::string_view::npos;
    const std::string_view param_text = param ? trim(item.substr(colon + 1)) : std::string_view{};
    auto need_param = [&]() -> std::string_view {
      if (!param || param_text.empty())
        throw ModelError("term '" + std::string(item) + "' needs a parameter");
      return param_text;
    };
    auto no_param = [&] {
      if (param) throw ModelError("term '" + std::string(item) + "' takes no parameter");
    };
    TermSpec t;
    if (name == "edges") {
      no_param();
      t = TermSpec::edges();
    } else if (name == "twopath" || name == "two-path") {
      no_param();
      t = TermSpec::two_path();
    } else if (name == "kcycle" || name == "cycle") {
      t = TermSpec::k_cycle(parse_int(item, need_param()));
    } else if (name == "kdegree" || name == "degree") {
      t = TermSpec::k_degree(parse_int(item, need_param()));
    } else if (name == "gwd" || name == "gwdegree" || name == "gwesp" || name == "gwnsp" ||
               name == "gwdsp") {
      const double d = param ? parse_decay(item, need_param()) : default_decay;
      if (name == "gwd" || name == "gwdegree") t = TermSpec::gwd(d);
      else if (name == "gwesp") t = TermSpec::gwesp(d);
      else if (name == "gwnsp") t = TermSpec::gwnsp(d);
      else t = TermSpec::gwdsp(d);
    } else if (name == "nodematch") {
      t = TermSpec::nodematch(std::string(param_text));
    } else {
      throw ModelError("unknown term '" + std::string(item) + "'");
    }
    model.terms.push_back(std::move(t));
  }
  return model;
}

std::string ModelSpec::to_string() const {
  std::string out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (t) out += ',';
    out += terms[t].to_string();
  }
  return out;
}

ModelSpec ModelSpec::best_assessment(double decay) {
  return {{TermSpec::edges(), TermSpec::gwesp(decay), TermSpec::gwnsp(decay)}};
}

ModelSpec ModelSpec::full_candidate(double decay, std::string attribute) {
  return {{TermSpec::edges(), TermSpec::two_path(), TermSpec::gwesp(decay), TermSpec::gwdsp(decay),
           TermSpec::gwnsp(decay), TermSpec::gwd(decay), TermSpec::nodematch(std::move(attribute))}};
}

ModelSpec ModelSpec::without(std::size_t index) const {
  ModelSpec out = *this;
  out.terms.erase(out.terms.begin() + static_cast<std::ptrdiff_t>(index));
  return out;
}

std::vector<Diagnostic> validate_model(const ModelSpec& model, std::size_t n,
                                       const NodeAttributes* attrs) {
  std::vector<Diagnostic> out;
  if (model.terms.empty()) out.push_back({"empty-model", "model has no terms"});
  for (std::size_t t = 0; t < model.terms.size(); ++t) {
    const TermSpec& term = model.terms[t];
    for (std::size_t s = 0; s < t; ++s) {
      if (model.terms[s] == term) {
        out.push_back({"duplicate-term", "term '" + term.to_string() + "' appears more than once"});
        break;
      }
    }
    if (term.is_geometric() && !(term.decay > 0.0 && std::isfinite(term.decay)))
      out.push_back({"invalid-decay", "term '" + term.to_string() + "' needs a decay > 0"});
    if (term.kind == TermKind::k_cycle && term.k != 3 && term.k != 4)
      out.push_back({"invalid-cycle-length",
                     "term '" + term.to_string() + "': only 3- and 4-cycles are supported"});
    if (term.kind == TermKind::k_degree &&
        (term.k < 0 || static_cast<std::size_t>(term.k) >= std::max<std::size_t>(n, 1)))
      out.push_back({"invalid-degree", "term '" + term.to_string() + "': k must lie in 0.." +
                                           std::to_string(n == 0 ? 0 : n - 1)});
    if (term.kind == TermKind::nodematch) {
      if (attrs == nullptr) {
        out.push_back({"missing-attribute", "term '" + term.to_string() + "' needs node attributes"});
      } else if (!term.attribute.empty() && term.attribute != attrs->name) {
        out.push_back({"missing-attribute", "term '" + term.to_string() + "' needs attribute '" +
                                                term.attribute + "' but '" + attrs->name +
                                                "' was supplied"});
      } else if (attrs->size() != n) {
        out.push_back({"attribute-length", "attribute '" + attrs->name + "' has " +
                                               std::to_string(attrs->size()) + " labels for " +
                                               std::to_string(n) + " nodes"});
      }
    }
  }
  return out;
}

void require_valid(const ModelSpec& model, std::size_t n, const NodeAttributes* attrs) {
  const auto diags = validate_model(model, n, attrs);
  if (diags.empty()) return;
  std::string msg = "invalid model '" + model.to_string() + "':";
  for (const auto& d : diags) msg += " [" + d.code + "] " + d.message + ";";
  msg.pop_back();
  throw ModelError(msg);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) s += a[k] * b[k];
  return s;
}

CompiledModel::CompiledModel(ModelSpec model, std::size_t n, const NodeAttributes* attrs)
    : model_(std::move(model)), n_(n), attrs_(attrs) {
  require_valid(model_, n_, attrs_);
  weights_.resize(model_.size());
  for (std::size_t t = 0; t < model_.size(); ++t) {
    const TermSpec& term = model_.terms[t];
    if (!term.is_geometric()) continue;
    const double scale = std::exp(term.decay);
    const double r = -std::expm1(-term.decay);  // 1 - e^-t
    Weights& w = weights_[t];
    w.value.resize(n_ + 2);
    double rs = 1.0;
    for (std::size_t s = 0; s < w.value.size(); ++s) {
      w.value[s] = scale * (1.0 - rs);
      rs *= r;
    }
    w.step.resize(n_ + 1);
    for (std::size_t s = 0; s + 1 < w.value.size(); ++s) w.step[s] = w.value[s + 1] - w.value[s];
  }
}

StatVector CompiledModel::evaluate(const Graph& g) const {
  const std::size_t n = g.node_count();
  StatVector out(model_.size(), 0.0);

  bool need_sp = false;
  bool need_c4 = false;
  for (const auto& t : model_.terms) {
    need_sp |= t.kind == TermKind::gwesp || t.kind == TermKind::gwnsp || t.kind == TermKind::gwdsp;
    need_c4 |= t.kind == TermKind::k_cycle && t.k == 4;
  }
  SharedPartnerDistributions sp;
  if (need_sp) sp = shared_partner_distributions(g);
  double c4 = 0.0;
  if (need_c4) {
    // Each 4-cycle has two diagonals, each joined by exactly two paths of length 2.
    std::int64_t pairs = 0;
    for (Node i = 0; i < n; ++i)
      for (Node j = i + 1; j < n; ++j) {
        const std::int64_t c = g.common_neighbors(i, j);
        pairs += c * (c - 1) / 2;
      }
    c4 = static_cast<double>(pairs / 2);
  }
  const auto degrees = g.degrees();

  for (std::size_t t = 0; t < model_.size(); ++t) {
    const TermSpec& term = model_.terms[t];
    double v = 0.0;
    switch (term.kind) {
      case TermKind::edges:
        v = static_cast<double>(g.edge_count());
        break;
      case TermKind::two_path:
        for (auto d : degrees) v += static_cast<double>(std::int64_t{d} * (d - 1) / 2);
        break;
      case TermKind::k_cycle:
        v = term.k == 3 ? static_cast<double>(triangle_count(g)) : c4;
        break;
      case TermKind::k_degree:
        for (auto d : degrees) v += (static_cast<int>(d) == term.k) ? 1.0 : 0.0;
        break;
      case TermKind::gwd:
        for (auto d : degrees) v += weights_[t].value[d];
        break;
      case TermKind::gwesp:
      case TermKind::gwnsp:
      case TermKind::gwdsp: {
        const auto& counts = term.kind == TermKind::gwesp   ? sp.esp
                             : term.kind == TermKind::gwnsp ? sp.nsp
                                                            : sp.dsp;
        for (std::size_t s = 1; s < counts.size(); ++s)
          if (counts[s] != 0) v += weights_[t].value[s] * static_cast<double>(counts[s]);
        break;
      }
      case TermKind::nodematch:
        for (const Edge& e : g.edges()) v += attrs_->matches(e.u, e.v) ? 1.0 : 0.0;
        break;
    }
    out[t] = v;
  }
  return out;
}

double CompiledModel::gw_change(const Weights& w, TermKind kind, const Graph& g, Node i, Node j,
                                unsigned present) const {
  double v = 0.0;
  // Shared-partner counts below are taken with (i,j) absent, so i (resp. j)
  // is discounted from cn(j,k) (resp. cn(i,k)) whenever the edge is present.
  const auto bump_pair_with_i = [&](Node k) { return w.step[g.common_neighbors(i, k) - present]; };
  const auto bump_pair_with_j = [&](Node k) { return w.step[g.common_neighbors(j, k) - present]; };
  switch (kind) {
    case TermKind::gwesp:
      v += w.value[g.common_neighbors(i, j)];
      g.for_each_common_neighbor(i, j, [&](Node k) { v += bump_pair_with_i(k) + bump_pair_with_j(k); });
      break;
    case TermKind::gwnsp:
      v -= w.value[g.common_neighbors(i, j)];
      g.for_each_neighbor(i, [&](Node k) {
        if (k != j && !g.has_edge(j, k)) v += bump_pair_with_j(k);
      });
      g.for_each_neighbor(j, [&](Node k) {
        if (k != i && !g.has_edge(i, k)) v += bump_pair_with_i(k);
      });
      break;
    case TermKind::gwdsp:
      g.for_each_neighbor(i, [&](Node k) {
        if (k != j) v += bump_pair_with_j(k);
      });
      g.for_each_neighbor(j, [&](Node k) {
        if (k != i) v += bump_pair_with_i(k);
      });
      break;
    default:
      break;
  }
  return v;
}

void CompiledModel::change(const Graph& g, Node i, Node j, std::span<double> out) const {
  if (i > j) std::swap(i, j);  // same summation order for both orientations
  const unsigned present = g.has_edge(i, j) ? 1u : 0u;
  const std::uint32_t di = g.degree(i) - present;
  const std::uint32_t dj = g.degree(j) - present;
  for (std::size_t t = 0; t < model_.size(); ++t) {
    const TermSpec& term = model_.terms[t];
    double v = 0.0;
    switch (term.kind) {
      case TermKind::edges:
        v = 1.0;
        break;
      case TermKind::two_path:
        v = static_cast<double>(di + dj);
        break;
      case TermKind::k_cycle:
        if (term.k == 3) {
          v = g.common_neighbors(i, j);
        } else {
          // Paths i-k-l-j of length 3 that avoid the dyad itself.
          g.for_each_neighbor(i, [&](Node k) {
            if (k != j) v += static_cast<double>(g.common_neighbors(k, j) - present);
          });
        }
        break;
      case TermKind::k_degree: {
        const auto k = static_cast<std::uint32_t>(term.k);
        v = double(di + 1 == k) - double(di == k) + double(dj + 1 == k) - double(dj == k);
        break;
      }
      case TermKind::gwd:
        v = weights_[t].step[di] + weights_[t].step[dj];
        break;
      case TermKind::gwesp:
      case TermKind::gwnsp:
      case TermKind::gwdsp:
        v = gw_change(weights_[t], term.kind, g, i, j, present);
        break;
      case TermKind::nodematch:
        v = attrs_->matches(i, j) ? 1.0 : 0.0;
        break;
    }
    out[t] = v;
  }
}

StatVector CompiledModel::change(const Graph& g, Node i, Node j) const {
  if (i == j || i >= g.node_count() || j >= g.node_count())
    throw DataError("change statistics need two distinct in-range nodes, got (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
  StatVector out(model_.size());
  change(g, i, j, out);
  return out;
}

StatVector evaluate_statistics(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs) {
  return CompiledModel(model, g.node_count(), attrs).evaluate(g);
}

StatVector change_statistics(const ModelSpec& model, const Graph& g, Node i, Node j,
                             const NodeAttributes* attrs) {
  return CompiledModel(model, g.node_count(), attrs).change(g, i, j);
}

}  // namespace brainergm
