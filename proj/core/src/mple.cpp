#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "brainergm/errors.hpp"
#include "brainergm/estimation.hpp"

namespace brainergm {

namespace {

constexpr int kMaxNewton = 100;
constexpr double kDivergence = 1e3;

struct DesignRow {
  double weight = 0.0;  // dyads sharing this change-statistic row
  double ones = 0.0;    // of which are edges
};

double log_sigmoid(double x) noexcept {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

std::string_view to_string(FitMethod m) noexcept {
  return m == FitMethod::mple ? "mple" : "mcmc";
}

FitMethod parse_fit_method(std::string_view text) {
  if (text == "mple") return FitMethod::mple;
  if (text == "mcmc" || text == "mcmc-mle" || text == "mcmc_mle") return FitMethod::mcmc_mle;
  throw DataError("unknown fit method '" + std::string(text) + "' (expected mple or mcmc)");
}

double normal_two_sided_p(double z) noexcept {
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

void attach_inverse_information(FitResult& fit, std::span<const double> information) {
  const auto p = static_cast<Eigen::Index>(fit.theta.size());
  const Eigen::Map<const Eigen::MatrixXd> info(information.data(), p, p);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(info, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (p == 0 || s(p - 1) <= 1e-12 * std::max(1.0, s(0)))
    throw NonConvergenceError("singular information matrix for model '" + fit.model.to_string() +
                              "'; some term is (nearly) collinear or constant");
  const Eigen::MatrixXd cov = svd.solve(Eigen::MatrixXd::Identity(p, p));
  fit.covariance.assign(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(p)));
  fit.se.resize(static_cast<std::size_t>(p));
  fit.wald_p.resize(static_cast<std::size_t>(p));
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = 0; b < p; ++b)
      fit.covariance[a][b] = 0.5 * (cov(a, b) + cov(b, a));
    const double var = fit.covariance[a][a];
    fit.se[a] = var > 0 ? std::sqrt(var) : std::numeric_limits<double>::quiet_NaN();
    fit.wald_p[a] = normal_two_sided_p(fit.theta[a] / fit.se[a]);
  }
}

FitResult mple(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs) {
  const CompiledModel compiled(model, g.node_count(), attrs);
  const std::size_t p = compiled.size();
  const std::size_t dyads = g.dyad_count();
  const std::size_t m = g.edge_count();
  if (dyads == 0) throw DataError("graph has fewer than two nodes");
  if (m == 0)
    throw DataError("graph density is 0 (empty graph): no finite maximum pseudo-likelihood");
  if (m == dyads)
    throw DataError("graph density is 1 (complete graph): no finite maximum pseudo-likelihood");

  std::map<std::vector<double>, DesignRow> rows;
  StatVector delta(p);
  for (Node i = 0; i < g.node_count(); ++i)
    for (Node j = i + 1; j < g.node_count(); ++j) {
      compiled.change(g, i, j, delta);
      DesignRow& r = rows[delta];
      r.weight += 1.0;
      if (g.has_edge(i, j)) r.ones += 1.0;
    }

  const auto rcount = static_cast<Eigen::Index>(rows.size());
  const auto pp = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd x(rcount, pp);
  Eigen::VectorXd w(rcount);
  Eigen::VectorXd ones(rcount);
  {
    Eigen::Index r = 0;
    for (const auto& [key, row] : rows) {
      for (Eigen::Index t = 0; t < pp; ++t) x(r, t) = key[static_cast<std::size_t>(t)];
      w(r) = row.weight;
      ones(r) = row.ones;
      ++r;
    }
  }

  // A single change statistic that strictly orders edges above (or below)
  // non-edges separates the data and pushes its coefficient to infinity.
  for (Eigen::Index t = 0; t < pp; ++t) {
    double lo1 = INFINITY, hi1 = -INFINITY, lo0 = INFINITY, hi0 = -INFINITY;
    for (Eigen::Index r = 0; r < rcount; ++r) {
      if (ones(r) > 0) lo1 = std::min(lo1, x(r, t)), hi1 = std::max(hi1, x(r, t));
      if (ones(r) < w(r)) lo0 = std::min(lo0, x(r, t)), hi0 = std::max(hi0, x(r, t));
    }
    if (hi0 < lo1 || hi1 < lo0)
      throw NonConvergenceError("complete separation: the change statistic of term '" +
                                model.terms[static_cast<std::size_t>(t)].to_string() +
                                "' perfectly predicts the observed edges");
  }

  auto pseudo_loglik = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd eta = x * th;
    double ll = 0.0;
    for (Eigen::Index r = 0; r < rcount; ++r)
      ll += ones(r) * log_sigmoid(eta(r)) + (w(r) - ones(r)) * log_sigmoid(-eta(r));
    return ll;
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(pp);
  if (auto e = model.index_of(TermKind::edges)) {
    const double d = static_cast<double>(m) / static_cast<double>(dyads);
    theta(static_cast<Eigen::Index>(*e)) = std::log(d / (1.0 - d));
  }

  FitResult fit;
  fit.model = model;
  fit.method = FitMethod::mple;
  fit.nodes = g.node_count();
  fit.observed = compiled.evaluate(g);

  double ll = pseudo_loglik(theta);
  Eigen::MatrixXd info(pp, pp);
  for (int it = 1; it <= kMaxNewton; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd eta = x * theta;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(pp);
    info.setZero();
    for (Eigen::Index r = 0; r < rcount; ++r) {
      const double pr = sigmoid(eta(r));
      grad += (ones(r) - w(r) * pr) * x.row(r).transpose();
      info.noalias() += (w(r) * pr * (1.0 - pr)) * x.row(r).transpose() * x.row(r);
    }
    const double grad_scale = std::max(1.0, static_cast<double>(dyads));
    if (grad.cwiseAbs().maxCoeff() < 1e-12 * grad_scale) {
      fit.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
      throw NonConvergenceError("singular information matrix for model '" + model.to_string() + "'");
    Eigen::VectorXd step = ldlt.solve(grad);
    double scale = 1.0;
    Eigen::VectorXd next = theta + step;
    double next_ll = pseudo_loglik(next);
    while (next_ll < ll && scale > 1e-8) {
      scale *= 0.5;
      next = theta + scale * step;
      next_ll = pseudo_loglik(next);
    }
    const double moved = (next - theta).cwiseAbs().maxCoeff();
    theta = next;
    ll = next_ll;
    if (theta.cwiseAbs().maxCoeff() > kDivergence) {
      Eigen::Index worst = 0;
      theta.cwiseAbs().maxCoeff(&worst);
      throw NonConvergenceError("pseudo-likelihood diverges along term '" +
                                model.terms[static_cast<std::size_t>(worst)].to_string() + "'");
    }
    if (moved < 1e-13) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw NonConvergenceError("MPLE Newton iterations did not converge for model '" +
                              model.to_string() + "'");

  fit.theta.assign(theta.data(), theta.data() + pp);
  {
    // Information at the final estimate.
    const Eigen::VectorXd eta = x * theta;
    info.setZero();
    for (Eigen::Index r = 0; r < rcount; ++r) {
      const double pr = sigmoid(eta(r));
      info.noalias() += (w(r) * pr * (1.0 - pr)) * x.row(r).transpose() * x.row(r);
    }
  }
  attach_inverse_information(fit, std::span<const double>(info.data(), static_cast<std::size_t>(pp * pp)));
  fit.loglik = ll;
  fit.loglik_is_pseudo = true;
  fit.aic = 2.0 * static_cast<double>(p) - 2.0 * ll;
  fit.notes.push_back("loglik is the pseudo-log-likelihood; standard errors ignore dyad dependence");
  return fit;
}

}  // namespace brainergm
