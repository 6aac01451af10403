#pragma once

#include <span>

namespace qwline {

//! P(X >= statistic) for X ~ chi-square with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins_used = 0;  //!< bins after merging low-expectation neighbors
};

//! Pearson goodness-of-fit of observed counts against expected counts.
//! Adjacent bins are merged until every expected count is at least
//! `min_expected`; degrees of freedom are bins_used - 1 - `fitted_params`.
Chi2Result chi_square_gof(std::span<const double> observed,
                          std::span<const double> expected,
                          double min_expected = 5.0, int fitted_params = 0);

}  // namespace qwline
