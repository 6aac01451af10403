#include "qwline/classical.hpp"

#include <cmath>
#include <string>

namespace qwline {

ClassicalDistribution classical_delta(double stay_p, int position) {
  if (!(stay_p >= 0.0 && stay_p <= 1.0))
    throw std::invalid_argument("classical_delta: stay probability must lie in [0, 1]");
  ClassicalDistribution d;
  d.stay_p = stay_p;
  d.dist.first_site = position;
  d.dist.p = {1.0};
  return d;
}

ClassicalDistribution classical_step(const ClassicalDistribution& P) {
  const double s = P.dist.sum();
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument("classical_step: distribution sums to " +
                                std::to_string(s) + ", expected 1 within 1e-6");
  const double stay = P.stay_p;
  const double hop = 0.5 * (1.0 - stay);
  ClassicalDistribution out;
  out.stay_p = stay;
  out.dist.first_site = P.dist.first_site - 1;
  out.dist.p.assign(P.dist.p.size() + 2, 0.0);
  for (std::size_t i = 0; i < P.dist.p.size(); ++i) {
    const double w = P.dist.p[i];
    if (w == 0.0) continue;
    out.dist.p[i] += hop * w;       // site moves one left
    out.dist.p[i + 1] += stay * w;  // stays
    out.dist.p[i + 2] += hop * w;   // one right
  }
  return out;
}

double d_cl(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("d_cl: p must lie in [0, 1]");
  return 0.5 * (1.0 - p);
}

double brownian_variance(const BrownianParams& params, double t) {
  if (!(params.C > 0.0) || !(params.gamma > 0.0))
    throw std::invalid_argument("brownian_variance: C and gamma must be positive");
  if (t < 0.0) throw std::invalid_argument("brownian_variance: t must be >= 0");
  const double x = params.gamma * t;
  if (x < 1e-4) {
    // sigma^2 = C t^2 (1 - x/3 + x^2/12 - x^3/60 + ...)
    return params.C * t * t * (1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0);
  }
  return (2.0 * params.C / params.gamma) *
         (t - (1.0 - std::exp(-x)) / params.gamma);
}

double gamma_from_period(int period) {
  if (period < 1) throw std::invalid_argument("gamma_from_period: period must be >= 1");
  return 2.0 / static_cast<double>(period);
}

double gamma_from_p(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("gamma_from_p: requires 0 < p < 1, got p = " +
                            std::to_string(p));
  return kGammaLinkCoeff * p / (1.0 - p);
}

}  // namespace qwline
