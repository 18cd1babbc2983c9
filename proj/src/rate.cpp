#include "segvote/rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "segvote/error.hpp"

namespace segvote {

DiscreteDist::DiscreteDist(std::vector<double> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty()) throw ParamError("discrete law needs at least one support point");
  if (support_.size() != probs_.size()) throw ParamError("support and probs differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0)) throw ParamError("probabilities must be nonnegative");
    if (!std::isfinite(support_[i])) throw ParamError("support points must be finite");
    total += probs_[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (support_[j] == support_[i]) throw ParamError("support points must be distinct");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParamError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

double DiscreteDist::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) m += probs_[i] * support_[i];
  return m;
}

double DiscreteDist::prob_of(double x) const {
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (support_[i] == x) return probs_[i];
  }
  return 0.0;
}

double cgf(const DiscreteDist& dist, double t) {
  const auto& xs = dist.support();
  const auto& ps = dist.probs();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ps[i] > 0.0) shift = std::max(shift, t * xs[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ps[i] > 0.0) sum += ps[i] * std::exp(t * xs[i] - shift);
  }
  return shift + std::log(sum);
}

double cgf_derivative(const DiscreteDist& dist, double t) {
  const auto& xs = dist.support();
  const auto& ps = dist.probs();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ps[i] > 0.0) shift = std::max(shift, t * xs[i]);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (ps[i] <= 0.0) continue;
    const double w = ps[i] * std::exp(t * xs[i] - shift);
    num += w * xs[i];
    den += w;
  }
  return num / den;
}

GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                            double hi, double tol, int max_iterations) {
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  GoldenSectionResult res;
  while (hi - lo > tol && res.iterations < max_iterations) {
    ++res.iterations;
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    }
  }
  res.converged = hi - lo <= tol;
  res.x = 0.5 * (lo + hi);
  res.fx = f(res.x);
  return res;
}

RateResult rate_zero(const DiscreteDist& dist) {
  bool has_neg = false;
  bool has_pos = false;
  for (std::size_t i = 0; i < dist.support().size(); ++i) {
    if (dist.probs()[i] <= 0.0) continue;
    has_neg = has_neg || dist.support()[i] < 0.0;
    has_pos = has_pos || dist.support()[i] > 0.0;
  }
  if (!has_neg || !has_pos) {
    throw DegenerateSignError("rate_zero needs probability mass on both sides of zero");
  }

  const double slope0 = cgf_derivative(dist, 0.0);
  if (slope0 == 0.0) return RateResult{0.0, 0.0, true};

  // The minimizer lies on the side where the derivative is negative at 0.
  // Double the outer end until the derivative changes sign.
  const double dir = slope0 < 0.0 ? 1.0 : -1.0;
  double inner = 0.0;
  double outer = dir;
  int expansions = 0;
  while (cgf_derivative(dist, outer) * dir < 0.0) {
    inner = outer;
    outer *= 2.0;
    if (++expansions > 1100) throw DegenerateSignError("rate_zero: bracket did not close");
  }

  const auto gs = golden_section_minimize([&](double t) { return cgf(dist, t); }, inner, outer);
  RateResult out;
  out.minimizer_t = gs.x;
  out.value = std::max(0.0, -gs.fx);
  out.converged = gs.converged;
  return out;
}

DiscreteDist model_a_segment_vote_dist(double rho) {
  if (!(rho > 0.0 && rho < 0.5)) throw ParamError("rho must lie in (0, 1/2)");
  const double up = rho * (1.0 - rho);
  const double down = 0.5 * (1.0 - 2.0 * rho + 2.0 * rho * rho);
  return DiscreteDist({-1.0, 0.0, 1.0}, {down, 0.5, up});
}

DiscreteDist model_a_coordinate_dist(double rho) {
  if (!(rho > 0.0 && rho < 0.5)) throw ParamError("rho must lie in (0, 1/2)");
  const double up = rho * (1.0 - rho) + 0.25;
  const double down = 0.5 * (1.0 - 2.0 * rho + 2.0 * rho * rho) + 0.25;
  return DiscreteDist({-1.0, 1.0}, {down, up});
}

double bernoulli_relative_entropy(double x, double p) {
  if (!(x >= 0.0 && x <= 1.0)) throw ParamError("x must lie in [0, 1]");
  if (!(p >= 0.0 && p <= 1.0)) throw ParamError("p must lie in [0, 1]");
  auto term = [](double a, double b) {
    if (a == 0.0) return 0.0;
    if (b == 0.0) return std::numeric_limits<double>::infinity();
    return a * std::log(a / b);
  };
  return term(x, p) + term(1.0 - x, 1.0 - p);
}

}  // namespace segvote
