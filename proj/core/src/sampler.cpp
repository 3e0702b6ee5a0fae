#include "brainergm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "brainergm/errors.hpp"
#include "brainergm/rng.hpp"

namespace brainergm {

namespace {

constexpr double kLowDensity = 0.005;
constexpr double kHighDensity = 0.995;
constexpr std::uint64_t kDriftWindow = 10'000;
constexpr std::uint64_t kHookStride = 4096;

/// Edge list with O(1) uniform choice, insertion and removal.
class EdgeIndex {
 public:
  explicit EdgeIndex(const Graph& g) : n_(g.node_count()), pos_(n_ * n_, -1) {
    for (const Edge& e : g.edges()) insert(e.u, e.v);
  }

  std::size_t size() const noexcept { return edges_.size(); }
  const Edge& at(std::size_t k) const noexcept { return edges_[k]; }

  void insert(Node i, Node j) {
    if (i > j) std::swap(i, j);
    pos_[i * n_ + j] = static_cast<std::int32_t>(edges_.size());
    edges_.push_back({i, j});
  }

  void erase(Node i, Node j) {
    if (i > j) std::swap(i, j);
    const auto k = static_cast<std::size_t>(pos_[i * n_ + j]);
    const Edge last = edges_.back();
    edges_[k] = last;
    pos_[last.u * n_ + last.v] = static_cast<std::int32_t>(k);
    edges_.pop_back();
    pos_[i * n_ + j] = -1;
  }

 private:
  std::size_t n_;
  std::vector<std::int32_t> pos_;
  std::vector<Edge> edges_;
};

double edge_pick_probability(std::size_t edges, std::size_t non_edges) noexcept {
  if (edges == 0) return 0.0;
  if (non_edges == 0) return 1.0;
  return 0.5;
}

struct ChainResult {
  std::vector<Graph> graphs;
  std::vector<StatVector> stats;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  DensityTrace trace;
};

Graph initial_graph(const CompiledModel& model, std::span<const double> theta,
                    const SamplerControl& control, const Graph* observed, std::uint64_t seed) {
  InitialState init = control.initial;
  if (init == InitialState::automatic)
    init = observed != nullptr ? InitialState::observed : InitialState::bernoulli;
  switch (init) {
    case InitialState::observed:
      if (observed == nullptr) throw DataError("initial state 'observed' needs an observed graph");
      return *observed;
    case InitialState::empty:
      return Graph(model.node_count());
    default: {
      double p = 0.5;
      if (auto e = model.spec().index_of(TermKind::edges)) p = 1.0 / (1.0 + std::exp(-theta[*e]));
      return bernoulli_graph(model.node_count(), p, seed);
    }
  }
}

void verify(const CompiledModel& model, const Graph& g, const StatVector& running) {
  const StatVector fresh = model.evaluate(g);
  for (std::size_t t = 0; t < fresh.size(); ++t) {
    const double tol = 1e-9 * std::max(1.0, std::abs(fresh[t]));
    if (std::abs(fresh[t] - running[t]) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "incremental statistic drift on term '" << model.spec().terms[t].to_string()
         << "': running " << running[t] << " vs recomputed " << fresh[t];
      throw Error(ErrorClass::internal, os.str());
    }
  }
}

ChainResult run_chain(const CompiledModel& model, std::span<const double> theta,
                      const SamplerControl& control, const Graph* observed, std::uint64_t chain,
                      std::uint64_t retain) {
  Rng rng = Rng::stream(control.seed, chain);
  Graph g = initial_graph(model, theta, control, observed, rng.next());
  const std::size_t n = g.node_count();
  const std::size_t dyads = g.dyad_count();
  EdgeIndex index(g);
  StatVector stats = model.evaluate(g);
  StatVector delta(model.size());

  bool check = control.verify_statistics;
#ifndef NDEBUG
  check = true;
#endif

  ChainResult out;
  const std::uint64_t burn = control.burn_in;
  out.trace.spacing = std::max<std::uint64_t>(1, std::min<std::uint64_t>(500, burn / 200));
  if (burn > 0) out.trace.density.reserve(burn / out.trace.spacing + 1);
  out.stats.reserve(retain);
  if (control.keep_graphs) out.graphs.reserve(retain);

  const std::uint64_t total = burn + control.interval * retain;
  std::uint64_t pending_hook = 0;

  for (std::uint64_t step = 1; step <= total; ++step) {
    if (dyads > 0) {
      Node i = 0;
      Node j = 0;
      double log_q = 0.0;
      const std::size_t m = index.size();
      if (control.proposal == Proposal::tie_no_tie) {
        const std::size_t non_edges = dyads - m;
        const double pe = edge_pick_probability(m, non_edges);
        if (rng.uniform() < pe) {
          const Edge& e = index.at(rng.below(m));
          i = e.u;
          j = e.v;
          log_q = std::log((1.0 - edge_pick_probability(m - 1, non_edges + 1)) /
                           static_cast<double>(non_edges + 1)) -
                  std::log(pe / static_cast<double>(m));
        } else {
          do {
            i = static_cast<Node>(rng.below(n));
            j = static_cast<Node>(rng.below(n));
          } while (i == j || g.has_edge(i, j));
          log_q = std::log(edge_pick_probability(m + 1, non_edges - 1) /
                           static_cast<double>(m + 1)) -
                  std::log((1.0 - pe) / static_cast<double>(non_edges));
        }
      } else {
        do {
          i = static_cast<Node>(rng.below(n));
          j = static_cast<Node>(rng.below(n));
        } while (i == j);
      }

      model.change(g, i, j, delta);
      const bool present = g.has_edge(i, j);
      const double sign = present ? -1.0 : 1.0;
      const double log_alpha = sign * dot(theta, delta) + log_q;
      ++out.proposals;
      if (log_alpha >= 0.0 || rng.uniform() < std::exp(log_alpha)) {
        g.toggle_unchecked(i, j);
        if (present)
          index.erase(i, j);
        else
          index.insert(i, j);
        for (std::size_t t = 0; t < stats.size(); ++t) stats[t] += sign * delta[t];
        ++out.accepted;
      }
    }

    if (step <= burn) {
      if (step % out.trace.spacing == 0) out.trace.density.push_back(g.density());
    } else if ((step - burn) % control.interval == 0) {
      if (check) verify(model, g, stats);
      out.stats.push_back(stats);
      if (control.keep_graphs) out.graphs.push_back(g);
    }

    if (++pending_hook == kHookStride || step == total) {
      if (control.hooks.proposals) control.hooks.proposals->fetch_add(pending_hook);
      pending_hook = 0;
      if (control.hooks.cancel && control.hooks.cancel->load()) throw CancelledError();
    }
  }
  return out;
}

}  // namespace

void SamplerControl::validate() const {
  if (interval < 1) throw DataError("sampler interval must be >= 1");
  if (sample_count < 1) throw DataError("sampler sample_count must be >= 1");
  if (chains < 1) throw DataError("sampler chains must be >= 1");
  if (chains > sample_count) throw DataError("sampler chains must not exceed sample_count");
}

std::uint64_t SamplerControl::total_proposals() const noexcept {
  return burn_in * chains + interval * sample_count;
}

DegeneracyReport degeneracy_check(const DensityTrace& trace) {
  DegeneracyReport r;
  const auto& d = trace.density;
  if (d.empty()) return r;
  const std::size_t half = d.size() / 2;
  const auto tail = std::span(d).subspan(half);
  const bool all_low = std::all_of(tail.begin(), tail.end(), [](double x) { return x < kLowDensity; });
  const bool all_high = std::all_of(tail.begin(), tail.end(), [](double x) { return x > kHighDensity; });
  if (all_low) {
    r = {true, "empty-graph-collapse", "density stayed below 0.005 for the final half of burn-in"};
    return r;
  }
  if (all_high) {
    r = {true, "complete-graph-collapse", "density stayed above 0.995 for the final half of burn-in"};
    return r;
  }
  const std::size_t window =
      std::min<std::size_t>(d.size(), std::max<std::uint64_t>(2, kDriftWindow / trace.spacing + 1));
  if (window >= 3) {
    const auto w = std::span(d).subspan(d.size() - window);
    bool up = true;
    bool down = true;
    for (std::size_t k = 1; k < w.size(); ++k) {
      up &= w[k] > w[k - 1];
      down &= w[k] < w[k - 1];
    }
    if (up) r = {true, "drift-to-complete", "edge count rose monotonically over the final 10^4 burn-in proposals"};
    if (down) r = {true, "drift-to-empty", "edge count fell monotonically over the final 10^4 burn-in proposals"};
  }
  return r;
}

StatVector SampleBatch::mean_statistics() const {
  if (stat_trace.empty()) return {};
  StatVector mean(stat_trace.front().size(), 0.0);
  for (const auto& row : stat_trace)
    for (std::size_t t = 0; t < row.size(); ++t) mean[t] += row[t];
  for (auto& v : mean) v /= static_cast<double>(stat_trace.size());
  return mean;
}

Graph bernoulli_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  Graph g(n);
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j)
      if (rng.uniform() < p) g.toggle_unchecked(i, j);
  return g;
}

SampleBatch sample(const CompiledModel& model, std::span<const double> theta,
                   const SamplerControl& control, const Graph* observed) {
  control.validate();
  if (theta.size() != model.size())
    throw ModelError("theta has " + std::to_string(theta.size()) + " coordinates but the model has " +
                     std::to_string(model.size()) + " terms");
  if (observed != nullptr && observed->node_count() != model.node_count())
    throw DataError("observed graph has " + std::to_string(observed->node_count()) +
                    " nodes, model was compiled for " + std::to_string(model.node_count()));

  const std::uint32_t chains = control.chains;
  std::vector<ChainResult> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  auto work = [&](std::uint32_t c) {
    const std::uint64_t retain =
        control.sample_count / chains + (c < control.sample_count % chains ? 1 : 0);
    try {
      results[c] = run_chain(model, theta, control, observed, c, retain);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };

  std::uint32_t threads = control.threads == 0 ? std::thread::hardware_concurrency() : control.threads;
  threads = std::clamp<std::uint32_t>(threads, 1, chains);
  if (threads == 1) {
    for (std::uint32_t c = 0; c < chains; ++c) work(c);
  } else {
    std::atomic<std::uint32_t> next{0};
    std::vector<std::jthread> pool;
    for (std::uint32_t w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (std::uint32_t c = next++; c < chains; c = next++) work(c);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SampleBatch batch;
  batch.seed = control.seed;
  std::uint64_t proposals = 0;
  std::uint64_t accepted = 0;
  for (auto& r : results) {
    proposals += r.proposals;
    accepted += r.accepted;
    if (!batch.diagnostics.degenerate) {
      DensityTrace t = r.trace;
      if (t.density.empty()) {
        // No burn-in: judge the retained samples instead.
        t.spacing = control.interval;
        const auto e = model.spec().index_of(TermKind::edges);
        const double dyads = static_cast<double>(model.node_count() * (model.node_count() - 1) / 2);
        if (!r.graphs.empty()) {
          for (const auto& g : r.graphs) t.density.push_back(g.density());
        } else if (e && dyads > 0) {
          for (const auto& s : r.stats) t.density.push_back(s[*e] / dyads);
        }
      }
      batch.diagnostics = degeneracy_check(t);
    }
    for (auto& s : r.stats) batch.stat_trace.push_back(std::move(s));
    for (auto& g : r.graphs) batch.graphs.push_back(std::move(g));
    batch.burn_in_traces.push_back(std::move(r.trace));
  }
  batch.acceptance_rate = proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);

  if (batch.diagnostics.degenerate && control.fail_on_degeneracy)
    throw DegenerateModelError("degenerate chain (" + batch.diagnostics.code + "): " +
                               batch.diagnostics.reason);
  return batch;
}

SampleBatch sample(const ModelSpec& model, std::span<const double> theta, std::size_t n,
                   const NodeAttributes* attrs, const SamplerControl& control, const Graph* observed) {
  const CompiledModel compiled(model, n, attrs);
  return sample(compiled, theta, control, observed);
}

}  // namespace brainergm
