#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "brainergm/errors.hpp"
#include "brainergm/selection.hpp"

namespace brainergm {

namespace {

double two_sided_t_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

}  // namespace

std::vector<CoordinateSummary> summarize_group(std::span<const FitResult> fits) {
  if (fits.size() < 2) throw DataError("group comparison needs at least two fits per group");
  const StatVector mean = average_profile(fits);
  const double n = static_cast<double>(fits.size());
  std::vector<CoordinateSummary> out(mean.size());
  for (std::size_t t = 0; t < mean.size(); ++t) {
    double ss = 0.0;
    for (const FitResult& f : fits) ss += (f.theta[t] - mean[t]) * (f.theta[t] - mean[t]);
    out[t] = {mean[t], std::sqrt(ss / (n - 1.0) / n), fits.size()};
  }
  return out;
}

GroupComparison group_compare(std::span<const CoordinateSummary> a,
                              std::span<const CoordinateSummary> b,
                              std::span<const std::string> terms, bool pooled) {
  if (a.size() != b.size())
    throw ModelError("groups have different numbers of coordinates (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  GroupComparison out;
  out.pooled = pooled;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const CoordinateSummary& x = a[t];
    const CoordinateSummary& y = b[t];
    if (x.n < 2 || y.n < 2) throw DataError("each group needs n >= 2 for a t test");
    if (x.se < 0 || y.se < 0) throw DataError("standard errors must be non-negative");
    CoordinateComparison c;
    c.term = t < terms.size() ? terms[t] : "theta" + std::to_string(t + 1);
    c.a = x;
    c.b = y;
    const double nx = static_cast<double>(x.n);
    const double ny = static_cast<double>(y.n);
    const double vx = x.se * x.se;
    const double vy = y.se * y.se;
    double se_diff = 0.0;
    if (pooled) {
      // se^2 * n recovers each group's sample variance.
      const double sp2 = ((nx - 1.0) * vx * nx + (ny - 1.0) * vy * ny) / (nx + ny - 2.0);
      se_diff = std::sqrt(sp2 * (1.0 / nx + 1.0 / ny));
      c.df = nx + ny - 2.0;
    } else {
      se_diff = std::sqrt(vx + vy);
      const double denom = vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0);
      c.df = denom > 0 ? (vx + vy) * (vx + vy) / denom : nx + ny - 2.0;
    }
    const double diff = x.mean - y.mean;
    if (se_diff > 0)
      c.t = diff / se_diff;
    else
      c.t = diff == 0 ? 0.0 : std::copysign(INFINITY, diff);
    c.p = two_sided_t_p(c.t, c.df);
    out.coordinates.push_back(c);
  }
  return out;
}

GroupComparison group_compare(std::span<const FitResult> a, std::span<const FitResult> b, bool pooled) {
  if (a.empty() || b.empty()) throw DataError("group comparison needs non-empty groups");
  if (!(a.front().model == b.front().model))
    throw ModelError("groups were fitted with different models: '" + a.front().model.to_string() +
                     "' vs '" + b.front().model.to_string() + "'");
  const auto sa = summarize_group(a);
  const auto sb = summarize_group(b);
  std::vector<std::string> names;
  for (const auto& t : a.front().model.terms) names.push_back(t.to_string());
  return group_compare(sa, sb, names, pooled);
}

}  // namespace brainergm
