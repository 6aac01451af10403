#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qwline/classical.hpp"
#include "qwline/links.hpp"
#include "qwline/measure.hpp"
#include "qwline/stats.hpp"
#include "qwline/walk.hpp"

namespace qwline {

enum class Model { coherent, measured, broken_links, classical };

//! Full description of an ensemble computation. Two identical specs produce
//! bit-identical results, whatever the thread count.
struct EnsembleSpec {
  Model model = Model::coherent;
  int steps = 100;
  int trajectories = 1;
  std::uint64_t master_seed = 0;
  double theta = 0.78539816339744830961;  // pi/4: Hadamard coin
  Qubit initial_qubit = Qubit::symmetric();
  int initial_position = 0;
  //! measured model only
  MeasurementSchedule schedule = MeasurementSchedule::periodic(1);
  //! broken_links: break probability; classical: stay probability
  double p = 0.0;
  //! times (ascending) at which the ensemble-averaged distribution is kept
  std::vector<int> snapshot_times;
  //! measured model: keep per-trajectory measurement logs (memory!)
  bool keep_measurements = false;
};

//! Ensemble-averaged variance curve. sigma2 is computed from the ensemble-
//! averaged distribution (the canonical curve); sigma2_traj_mean is the mean
//! of per-trajectory variances, emitted for comparison. standard_errors are
//! delta-method errors of sigma2 from per-trajectory moment scatter.
struct VarianceSeries {
  std::vector<int> times;
  std::vector<double> sigma2;
  std::vector<double> standard_errors;
  std::vector<double> sigma2_traj_mean;
  int ensemble_size = 0;
};

struct DistributionSnapshot {
  int time = 0;
  Distribution dist;
};

struct EnsembleResult {
  VarianceSeries series;
  std::vector<DistributionSnapshot> snapshots;
  //! measured model with keep_measurements: log per trajectory, in
  //! trajectory-index order
  std::vector<std::vector<MeasurementEvent>> measurement_logs;
  //! true for broken_links with p > 1/2 (diffusion fits unreliable there)
  bool confinement_dominated = false;
};

//! Run the ensemble described by `spec` on `threads` workers (0 = hardware
//! default). The result is a pure function of `spec`.
EnsembleResult ensemble_run(const EnsembleSpec& spec, int threads = 0);

struct QuadraticFit {
  double C = 0.0;
  double relative_residual = 0.0;  //!< rms residual / rms value over window
  bool poor_fit = false;           //!< relative_residual > 0.05
};

//! Single-parameter least squares sigma^2 = C t^2 over t in [t_from, t_to].
QuadraticFit fit_quadratic_coefficient(const VarianceSeries& series, int t_from,
                                       int t_to);

struct DiffusionFit {
  double D = 0.0;
  double ci_low = 0.0;   //!< 95% confidence bounds from the slope standard error
  double ci_high = 0.0;
  double slope = 0.0;    //!< fitted d sigma^2 / dt (= 2D)
  double intercept = 0.0;
};

//! Ordinary least squares line through sigma^2(t) over the tail window;
//! D = slope / 2. Requires at least 10 samples in the window.
DiffusionFit fit_diffusion(const VarianceSeries& series, int tail_from, int tail_to);

//! Thrown when an iterative fit fails to converge.
struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BrownianFit {
  BrownianParams params;
  double residual_norm = 0.0;  //!< sqrt(mean squared residual)
  int iterations = 0;
  bool fixed_C = false;
};

//! Damped Gauss-Newton fit of the closed-form Brownian curve to the series,
//! over (C, gamma), or over gamma alone when fixed_C is given. Deterministic
//! initial guess: C from a quadratic fit of the early window, gamma from
//! 2C / tail slope. At most 200 iterations, relative step tolerance 1e-10.
BrownianFit fit_brownian(const VarianceSeries& series,
                         std::optional<double> fixed_C = std::nullopt);

struct GaussianityReport {
  double excess_kurtosis = 0.0;
  //! Probability-weighted divergence sum (P_n - E_n)^2 / E_n against the
  //! moment-matched Gaussian evaluated on the occupied sublattice. A shape
  //! score, not a calibrated test statistic (no ensemble size is known here).
  double chi_square = 0.0;
  int sites_compared = 0;
};

//! Shape diagnostics of a normalized distribution with positive variance.
//! If the distribution lives on a single parity sublattice (the coherent
//! walk occupies only sites of one parity at fixed t), the Gaussian is
//! matched on that sublattice with spacing 2.
GaussianityReport gaussianity(const Distribution& dist);

struct CrossoverEstimate {
  double time = 0.0;
  double threshold = 1.5;        //!< slope halfway between exponents 2 and 1
  double window_fraction = 0.2;  //!< half-width of the log-log slope window
};

//! Smallest t at which the local log-log slope of sigma^2(t), measured by a
//! least-squares line over t' in [(1-w) t, (1+w) t], drops below `threshold`.
//! nullopt when the slope never drops below the threshold.
std::optional<CrossoverEstimate> crossover_time(const VarianceSeries& series,
                                                double threshold = 1.5,
                                                double window_fraction = 0.2);

}  // namespace qwline
