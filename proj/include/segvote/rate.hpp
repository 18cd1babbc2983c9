#pragma once

// Large-deviation rates for sums of i.i.d. discrete variables.
//
// For a law X with negative mean, P(X_1 + ... + X_L >= 0) decays like
// exp(-L * I(0)) with I(0) = -inf_t log E exp(tX). All rates are in nats.

#include <functional>
#include <vector>

namespace segvote {

/// Finite law on distinct real support points.
class DiscreteDist {
public:
  /// Throws ParamError unless the sizes match, probs are nonnegative and sum
  /// to 1 within 1e-12, and support points are distinct.
  DiscreteDist(std::vector<double> support, std::vector<double> probs);

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& probs() const noexcept { return probs_; }

  double mean() const;
  /// Probability mass at `x` (0 when x is not a support point).
  double prob_of(double x) const;

private:
  std::vector<double> support_;
  std::vector<double> probs_;
};

struct RateResult {
  double value = 0.0;        // I(0), nats per summand
  double minimizer_t = 0.0;  // argmin of the cumulant generating function
  bool converged = false;
};

/// log E exp(tX), shifted by the largest exponent so it never overflows.
double cgf(const DiscreteDist& dist, double t);

/// d/dt cgf: the mean of the exponentially tilted law.
double cgf_derivative(const DiscreteDist& dist, double t);

struct GoldenSectionResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Golden-section search for the minimum of a unimodal f on [lo, hi].
/// Stops once the bracket is narrower than `tol`.
GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                            double hi, double tol = 1e-12,
                                            int max_iterations = 500);

/// I(0) = -inf_t cgf(dist, t). Requires mass on both sides of zero; a
/// one-sided law raises DegenerateSignError.
RateResult rate_zero(const DiscreteDist& dist);

/// Law of the per-coordinate comparison between a fresh word, its class
/// word and the rival class word in the sign-flip model:
/// P(+1) = rho(1-rho), P(0) = 1/2, P(-1) = (1 - 2rho + 2rho^2)/2.
DiscreteDist model_a_segment_vote_dist(double rho);

/// Same comparison with the coordinate rule, where a tie is split by a fair
/// coin: P(+1) = rho(1-rho) + 1/4, P(-1) = (1 - 2rho + 2rho^2)/2 + 1/4.
DiscreteDist model_a_coordinate_dist(double rho);

/// H(x | p) = x log(x/p) + (1-x) log((1-x)/(1-p)) with 0 log 0 = 0.
/// Returns +infinity when p is 0 or 1 and x puts mass where p has none.
double bernoulli_relative_entropy(double x, double p);

}  // namespace segvote
