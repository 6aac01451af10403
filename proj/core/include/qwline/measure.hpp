#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qwline/rng.hpp"
#include "qwline/walk.hpp"

namespace qwline {

//! When to interrupt the unitary evolution with a projective measurement.
//! periodic(T): every T steps. uniform_random(a, b): each interval drawn
//! uniformly from {a, ..., b}, independently. explicit_list: the given
//! intervals, cycled if the run outlasts them.
class MeasurementSchedule {
 public:
  enum class Kind { periodic, uniform_random, explicit_list };

  static MeasurementSchedule periodic(int period);
  static MeasurementSchedule uniform_random(int lo, int hi);
  static MeasurementSchedule explicit_intervals(std::vector<int> intervals);

  Kind kind() const noexcept { return kind_; }
  int period() const;                        //!< periodic only
  std::pair<int, int> uniform_bounds() const;  //!< uniform_random only
  const std::vector<int>& intervals() const;   //!< explicit_list only

  double mean_interval() const noexcept;        //!< E[T]
  double mean_square_interval() const noexcept; //!< E[T^2]

  //! Interval preceding measurement number `ordinal` (0-based). Consumes
  //! exactly one uniform draw for the uniform_random kind and none otherwise,
  //! so random streams stay aligned across schedule kinds.
  int next_interval(std::size_t ordinal, Xoshiro256StarStar& rng) const;

 private:
  MeasurementSchedule(Kind kind, int lo, int hi, std::vector<int> intervals);
  Kind kind_;
  int lo_ = 0;
  int hi_ = 0;
  std::vector<int> intervals_;
};

//! Distribution reached from a localized symmetric state after `period`
//! coherent steps, together with its moments: the single-period displacement
//! kernel of the measured walk.
struct KernelQ {
  int period = 0;
  Distribution q;
  double m1q = 0.0;      //!< first moment of q (0 for symmetric initial states)
  double m2q = 0.0;
  double sigma_q2 = 0.0; //!< variance gained per measurement period
};

KernelQ kernel_q(int period,
                 const CoinOperator& coin = CoinOperator::hadamard(),
                 const Qubit& initial = Qubit::symmetric());

//! Result of one joint position/chirality measurement.
struct CollapseOutcome {
  int site;
  int chirality_sign;      //!< sigma_y eigenvalue, +1 or -1
  SpinorField post_state;  //!< chirality_y(sign) localized at `site`
};

//! Position measurement by inverse-CDF lookup: scans sites in ascending
//! order and selects the first with cumulative probability exceeding u.
//! Returns the site and the conditional (renormalized, localized) state.
std::pair<int, SpinorField> measure_position(const SpinorField& state, double u);

//! In-place variant used by trajectory loops; returns the measured site and
//! leaves `state` collapsed to it with the renormalized site qubit.
int measure_position_inplace(SpinorField& state, double u);

//! Chirality measurement along y. Outcome +1 projects onto (1, +i)/sqrt(2),
//! outcome -1 onto (1, -i)/sqrt(2); u is compared against the +1 probability.
//! Returns the outcome sign and the collapsed (eigenstate) qubit.
std::pair<int, Qubit> measure_chirality_y(const Qubit& q, double u);

//! Joint measurement: position collapse from u_position, then chirality
//! collapse along y from u_chirality, in that fixed order.
CollapseOutcome measure_collapse(const SpinorField& state, double u_position,
                                 double u_chirality);

//! One application of the measured-walk master equation:
//! P'(n) = sum_j q(n - j) P(j), a discrete convolution with the kernel.
Distribution master_step(const Distribution& P, const KernelQ& kernel);

//! Diffusion coefficient of the periodically measured walk, sigma_q^2 / (2T),
//! evaluated from an explicit kernel.
double d_rm_periodic(const KernelQ& kernel);

//! Asymptotic form D = C T / 2, valid once T is large enough that
//! sigma_q^2(T) ~= C T^2.
double d_rm_periodic(int period, double quadratic_c);

//! Random (or generic) schedules: D = C E[T^2] / (2 E[T]).
double d_rm_random(const MeasurementSchedule& schedule, double quadratic_c);

//! One measurement event in a trajectory.
struct MeasurementEvent {
  int time = 0;
  int site = 0;
  int chirality_sign = 0;
};

//! Per-step moment record of a single stochastic trajectory. Entry t of
//! m1/m2 belongs to time t (so both have steps+1 entries). At measurement
//! times the record holds the post-collapse values.
struct TrajectoryRecord {
  std::vector<double> m1;
  std::vector<double> m2;
  std::vector<MeasurementEvent> measurements;
  std::vector<std::pair<int, Distribution>> snapshots;
};

//! Evolve one trajectory of the measured walk for `steps` steps. Every
//! measurement consumes exactly two uniform draws (position, then chirality)
//! plus whatever the schedule itself consumes, so trajectories are replayable
//! from (master_seed, index) alone. `snapshot_times` must be ascending.
TrajectoryRecord run_measured_trajectory(const MeasurementSchedule& schedule,
                                         int steps, const CoinOperator& coin,
                                         const Qubit& initial,
                                         int initial_position,
                                         Xoshiro256StarStar& rng,
                                         std::span<const int> snapshot_times = {});

}  // namespace qwline
