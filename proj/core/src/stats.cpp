#include "qwline/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <stdexcept>
#include <vector>

namespace qwline {

double chi_square_survival(double statistic, double dof) {
  if (dof <= 0.0)
    throw std::invalid_argument("chi_square_survival: dof must be positive");
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

Chi2Result chi_square_gof(std::span<const double> observed,
                          std::span<const double> expected,
                          double min_expected, int fitted_params) {
  if (observed.size() != expected.size())
    throw std::invalid_argument("chi_square_gof: length mismatch");
  if (observed.empty())
    throw std::invalid_argument("chi_square_gof: empty input");
  // Merge adjacent bins until each merged bin expects at least min_expected.
  std::vector<double> obs_m, exp_m;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= min_expected) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
      o_acc = 0.0;
      e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (obs_m.empty()) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
    } else {
      obs_m.back() += o_acc;
      exp_m.back() += e_acc;
    }
  }
  Chi2Result r;
  r.bins_used = static_cast<int>(obs_m.size());
  for (std::size_t i = 0; i < obs_m.size(); ++i) {
    if (exp_m[i] <= 0.0)
      throw std::invalid_argument("chi_square_gof: merged bin with zero expectation");
    const double d = obs_m[i] - exp_m[i];
    r.statistic += d * d / exp_m[i];
  }
  r.dof = r.bins_used - 1 - fitted_params;
  if (r.dof < 1) {
    r.dof = 0;
    r.p_value = 1.0;  // not enough resolution to reject anything
    return r;
  }
  r.p_value = chi_square_survival(r.statistic, static_cast<double>(r.dof));
  return r;
}

}  // namespace qwline
