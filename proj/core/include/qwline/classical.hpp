#pragma once

#include "qwline/walk.hpp"

namespace qwline {

//! Early-time quadratic variance coefficient sigma^2 ~= C t^2 of the coherent
//! walk started from the symmetric qubit. Default only: fits that re-estimate
//! C report their own value. (The exact asymptotic value is 1 - 1/sqrt(2).)
inline constexpr double kQuadraticGrowthC = 0.293;

//! Default coefficient of the dissipation bridge gamma = 0.73 p/(1-p) for the
//! broken-link model; fits report their own estimate alongside.
inline constexpr double kGammaLinkCoeff = 0.73;

//! Parameters of the closed-form Brownian variance curve
//! sigma^2(t) = (2C/gamma) [t - (1 - e^{-gamma t})/gamma].
struct BrownianParams {
  double C = kQuadraticGrowthC;
  double gamma = 1.0;
};

//! Position distribution of the classical stay/hop walk; `stay_p` is the
//! probability of not moving in one step.
struct ClassicalDistribution {
  Distribution dist;
  double stay_p = 0.0;
};

//! Delta distribution at `position` with the given stay probability.
ClassicalDistribution classical_delta(double stay_p, int position = 0);

//! P'(n) = p P(n) + (1-p)/2 [P(n+1) + P(n-1)].
ClassicalDistribution classical_step(const ClassicalDistribution& P);

//! Classical diffusion coefficient (1-p)/2.
double d_cl(double p);

//! Closed-form Brownian variance at time t; switches to a 4-term Taylor
//! expansion for gamma*t < 1e-4 to avoid cancellation.
double brownian_variance(const BrownianParams& params, double t);

//! Dissipation rate equivalent to periodic measurements: gamma = 2/T.
double gamma_from_period(int period);

//! Dissipation rate equivalent to broken links: gamma = 0.73 p/(1-p);
//! domain 0 < p < 1.
double gamma_from_p(double p);

}  // namespace qwline
