#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "brainergm/errors.hpp"
#include "brainergm/estimation.hpp"
#include "brainergm/rng.hpp"

namespace brainergm {

namespace {

constexpr double kTrustRadius = 1.0;
constexpr int kInnerIterations = 50;
constexpr std::size_t kBatches = 20;

/// Importance-sampling view of the log-likelihood ratio around theta_t,
/// built from z_m = g(Y_m) - g(y_obs) with Y_m drawn at theta_t:
///   l(theta_t + d) - l(theta_t) ~= -log mean_m exp(d . z_m).
class RatioApproximation {
 public:
  explicit RatioApproximation(Eigen::MatrixXd z) : z_(std::move(z)) {}

  struct Moments {
    double objective = 0.0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double ess = 0.0;
  };

  double objective(const Eigen::VectorXd& d) const {
    const Eigen::VectorXd a = z_ * d;
    const double mx = a.maxCoeff();
    const double lme = mx + std::log((a.array() - mx).exp().mean());
    return -lme;
  }

  Moments moments(const Eigen::VectorXd& d) const {
    const Eigen::VectorXd a = z_ * d;
    const double mx = a.maxCoeff();
    Eigen::VectorXd w = (a.array() - mx).exp();
    const double sum = w.sum();
    Moments out;
    out.objective = -(mx + std::log(sum / static_cast<double>(z_.rows())));
    w /= sum;
    out.ess = 1.0 / w.squaredNorm();
    out.mean = z_.transpose() * w;
    const Eigen::MatrixXd centered = z_.rowwise() - out.mean.transpose();
    out.cov = centered.transpose() * w.asDiagonal() * centered;
    return out;
  }

  const Eigen::MatrixXd& z() const noexcept { return z_; }

 private:
  Eigen::MatrixXd z_;
};

/// Hotelling-style statistic for "mean z = 0", with the Monte-Carlo
/// covariance of the mean taken from contiguous batch means so that chain
/// autocorrelation is accounted for.
double batch_means_t2(const Eigen::MatrixXd& z) {
  const Eigen::Index m = z.rows();
  const Eigen::Index p = z.cols();
  const Eigen::Index b = std::min<Eigen::Index>(kBatches, m);
  if (b < 2) return INFINITY;
  Eigen::MatrixXd means(b, p);
  for (Eigen::Index k = 0; k < b; ++k) {
    const Eigen::Index lo = k * m / b;
    const Eigen::Index hi = (k + 1) * m / b;
    means.row(k) = z.middleRows(lo, hi - lo).colwise().mean();
  }
  const Eigen::VectorXd grand = z.colwise().mean();
  const Eigen::MatrixXd c = means.rowwise() - grand.transpose();
  const Eigen::MatrixXd mean_cov = (c.transpose() * c) / static_cast<double>(b - 1) / static_cast<double>(b);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(mean_cov);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) return INFINITY;
  return grand.dot(ldlt.solve(grand));
}

bool outside_bounding_box(const Eigen::MatrixXd& z, std::string& which, const ModelSpec& model) {
  for (Eigen::Index t = 0; t < z.cols(); ++t) {
    if (z.col(t).minCoeff() > 0.0 || z.col(t).maxCoeff() < 0.0) {
      which = model.terms[static_cast<std::size_t>(t)].to_string();
      return true;
    }
  }
  return false;
}

}  // namespace

void EstimationControl::validate() const {
  mcmc.validate();
  if (max_iterations < 1) throw DataError("max_iterations must be positive");
  if (!(tolerance > 0)) throw DataError("tolerance must be positive");
  if (bridge_count < 1) throw DataError("bridge_count must be positive");
  if (samples_per_bridge < 1) throw DataError("samples_per_bridge must be positive");
}

FitResult mcmc_mle(const ModelSpec& model, const Graph& g, const NodeAttributes* attrs,
                   const EstimationControl& control, std::optional<StatVector> theta0) {
  control.validate();
  const CompiledModel compiled(model, g.node_count(), attrs);
  const auto p = static_cast<Eigen::Index>(compiled.size());
  if (g.edge_count() == 0 || g.edge_count() == g.dyad_count())
    throw DataError("MCMC MLE needs a graph that is neither empty nor complete");

  FitResult fit;
  fit.model = model;
  fit.method = FitMethod::mcmc_mle;
  fit.nodes = g.node_count();
  fit.seed = control.mcmc.seed;
  fit.observed = compiled.evaluate(g);

  StatVector start;
  if (theta0) {
    if (theta0->size() != compiled.size())
      throw ModelError("theta0 has " + std::to_string(theta0->size()) + " coordinates, model has " +
                       std::to_string(compiled.size()));
    start = *theta0;
  } else {
    try {
      start = mple(model, g, attrs).theta;
    } catch (const NonConvergenceError& e) {
      // Fall back to the Bernoulli fit on the Edges coordinate.
      start.assign(compiled.size(), 0.0);
      if (auto k = model.index_of(TermKind::edges)) {
        const double d = g.density();
        start[*k] = std::log(d / (1.0 - d));
      }
      fit.notes.push_back(std::string("MPLE start unavailable (") + e.what() + "); started from Bernoulli fit");
    }
  }

  Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(start.data(), p);
  const Eigen::VectorXd observed = Eigen::Map<const Eigen::VectorXd>(fit.observed.data(), p);
  RatioApproximation::Moments final_moments;
  bool outside = false;
  std::string outside_term;

  for (int it = 1; it <= control.max_iterations; ++it) {
    fit.iterations = it;
    SamplerControl sc = control.mcmc;
    sc.seed = derive_seed(control.mcmc.seed, static_cast<std::uint64_t>(it));
    sc.keep_graphs = false;
    sc.initial = InitialState::observed;
    const StatVector th(theta.data(), theta.data() + p);
    const SampleBatch batch = sample(compiled, th, sc, &g);

    Eigen::MatrixXd z(static_cast<Eigen::Index>(batch.stat_trace.size()), p);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      for (Eigen::Index t = 0; t < p; ++t)
        z(r, t) = batch.stat_trace[static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] - observed(t);
    outside = outside_bounding_box(z, outside_term, model);
    const double t2 = batch_means_t2(z);
    const RatioApproximation approx(std::move(z));

    // Damped Newton ascent on the approximation inside the trust region.
    Eigen::VectorXd d = Eigen::VectorXd::Zero(p);
    RatioApproximation::Moments mom = approx.moments(d);
    for (int inner = 0; inner < kInnerIterations; ++inner) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(mom.cov);
      if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
        if (inner == 0)
          throw NonConvergenceError("sampled statistics are (nearly) collinear at iteration " +
                                    std::to_string(it) + "; the model may be degenerate");
        break;
      }
      Eigen::VectorXd step = ldlt.solve(-mom.mean);
      const double reach = (d + step).cwiseAbs().maxCoeff();
      if (reach > kTrustRadius) {
        // Shrink so that the total move stays within the trust region.
        double lo = 0.0, hi = 1.0;
        for (int k = 0; k < 60; ++k) {
          const double mid = 0.5 * (lo + hi);
          ((d + mid * step).cwiseAbs().maxCoeff() > kTrustRadius ? hi : lo) = mid;
        }
        step *= lo;
      }
      double next_obj = approx.objective(d + step);
      int halvings = 0;
      while (next_obj < mom.objective && halvings < 30) {
        step *= 0.5;
        next_obj = approx.objective(d + step);
        ++halvings;
      }
      if (next_obj < mom.objective) break;
      d += step;
      mom = approx.moments(d);
      if (step.cwiseAbs().maxCoeff() < 1e-10 || d.cwiseAbs().maxCoeff() >= kTrustRadius - 1e-12) break;
    }

    theta += d;
    final_moments = mom;
    const double moved = d.cwiseAbs().maxCoeff();
    if (!outside && (moved < control.tolerance || t2 < static_cast<double>(p))) {
      fit.converged = true;
      break;
    }
  }

  if (!fit.converged) {
    if (outside)
      throw OutsideHullError("observed statistic '" + outside_term +
                             "' lies outside the range of the sampled statistics after " +
                             std::to_string(control.max_iterations) +
                             " iterations; try more samples or a different starting theta");
    throw NonConvergenceError("MCMC MLE did not converge within " +
                              std::to_string(control.max_iterations) + " iterations");
  }

  fit.theta.assign(theta.data(), theta.data() + p);
  attach_inverse_information(
      fit, std::span<const double>(final_moments.cov.data(), static_cast<std::size_t>(p * p)));

  if (control.compute_loglik) {
    const LogLikEstimate ll = log_likelihood(model, g, attrs, fit.theta, control);
    fit.loglik = ll.loglik;
    fit.aic = 2.0 * static_cast<double>(p) - 2.0 * ll.loglik;
  }
  return fit;
}

}  // namespace brainergm
