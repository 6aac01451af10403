#include "qwline/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qwline {

MeasurementSchedule::MeasurementSchedule(Kind kind, int lo, int hi,
                                         std::vector<int> intervals)
    : kind_(kind), lo_(lo), hi_(hi), intervals_(std::move(intervals)) {}

MeasurementSchedule MeasurementSchedule::periodic(int period) {
  if (period < 1)
    throw std::invalid_argument("MeasurementSchedule::periodic: period must be >= 1");
  return MeasurementSchedule{Kind::periodic, period, period, {}};
}

MeasurementSchedule MeasurementSchedule::uniform_random(int lo, int hi) {
  if (lo < 1 || hi < lo)
    throw std::invalid_argument(
        "MeasurementSchedule::uniform_random: bounds must satisfy 1 <= lo <= hi");
  return MeasurementSchedule{Kind::uniform_random, lo, hi, {}};
}

MeasurementSchedule MeasurementSchedule::explicit_intervals(std::vector<int> intervals) {
  if (intervals.empty())
    throw std::invalid_argument(
        "MeasurementSchedule::explicit_intervals: interval list must be non-empty");
  for (int T : intervals)
    if (T < 1)
      throw std::invalid_argument(
          "MeasurementSchedule::explicit_intervals: every interval must be >= 1");
  return MeasurementSchedule{Kind::explicit_list, 0, 0, std::move(intervals)};
}

int MeasurementSchedule::period() const {
  if (kind_ != Kind::periodic)
    throw std::logic_error("MeasurementSchedule::period: schedule is not periodic");
  return lo_;
}

std::pair<int, int> MeasurementSchedule::uniform_bounds() const {
  if (kind_ != Kind::uniform_random)
    throw std::logic_error(
        "MeasurementSchedule::uniform_bounds: schedule is not uniform_random");
  return {lo_, hi_};
}

const std::vector<int>& MeasurementSchedule::intervals() const {
  if (kind_ != Kind::explicit_list)
    throw std::logic_error("MeasurementSchedule::intervals: schedule is not explicit");
  return intervals_;
}

double MeasurementSchedule::mean_interval() const noexcept {
  switch (kind_) {
    case Kind::periodic:
      return static_cast<double>(lo_);
    case Kind::uniform_random:
      return 0.5 * (static_cast<double>(lo_) + static_cast<double>(hi_));
    case Kind::explicit_list:
    default: {
      double s = 0.0;
      for (int T : intervals_) s += T;
      return s / static_cast<double>(intervals_.size());
    }
  }
}

double MeasurementSchedule::mean_square_interval() const noexcept {
  switch (kind_) {
    case Kind::periodic:
      return static_cast<double>(lo_) * static_cast<double>(lo_);
    case Kind::uniform_random: {
      // E[T^2] for T uniform on the integers {lo, ..., hi}.
      const double a = lo_, b = hi_, m = b - a + 1.0;
      // sum of squares a..b = b(b+1)(2b+1)/6 - (a-1)a(2a-1)/6
      const double sb = b * (b + 1.0) * (2.0 * b + 1.0) / 6.0;
      const double sa = (a - 1.0) * a * (2.0 * a - 1.0) / 6.0;
      return (sb - sa) / m;
    }
    case Kind::explicit_list:
    default: {
      double s = 0.0;
      for (int T : intervals_) s += static_cast<double>(T) * T;
      return s / static_cast<double>(intervals_.size());
    }
  }
}

int MeasurementSchedule::next_interval(std::size_t ordinal,
                                       Xoshiro256StarStar& rng) const {
  switch (kind_) {
    case Kind::periodic:
      return lo_;
    case Kind::uniform_random: {
      const double u = rng.uniform01();
      const int span = hi_ - lo_ + 1;
      int k = lo_ + static_cast<int>(u * span);
      return std::min(k, hi_);  // guard the u -> 1 edge
    }
    case Kind::explicit_list:
    default:
      return intervals_[ordinal % intervals_.size()];
  }
}

KernelQ kernel_q(int period, const CoinOperator& coin, const Qubit& initial) {
  if (period < 1) throw std::invalid_argument("kernel_q: period must be >= 1");
  SpinorField state{initial, 0, period};
  for (int t = 0; t < period; ++t) state.advance(coin);
  KernelQ k;
  k.period = period;
  k.q = state.distribution();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < k.q.p.size(); ++i) {
    const double w = k.q.p[i];
    const double n = static_cast<double>(k.q.site(i));
    s0 += w;
    s1 += n * w;
    s2 += n * n * w;
  }
  if (std::abs(s0 - 1.0) > 1e-10)
    throw invalid_state("kernel_q: kernel norm drifted to " + std::to_string(s0));
  k.m1q = s1;
  k.m2q = s2;
  k.sigma_q2 = s2 - s1 * s1;
  return k;
}

int measure_position_inplace(SpinorField& state, double u) {
  const int lo = state.support_lo();
  const int hi = state.support_hi();
  double cum = 0.0;
  int chosen = lo - 1;
  double p_chosen = 0.0;
  for (int n = lo; n <= hi; ++n) {
    const double pn = state.site_probability(n);
    cum += pn;
    if (u < cum && pn > 0.0) {
      chosen = n;
      p_chosen = pn;
      break;
    }
  }
  if (chosen < lo) {
    // u fell beyond the accumulated norm (round-off or u ~ 1): take the last
    // site that carries any probability.
    for (int n = hi; n >= lo; --n) {
      const double pn = state.site_probability(n);
      if (pn > 0.0) {
        chosen = n;
        p_chosen = pn;
        break;
      }
    }
    if (chosen < lo)
      throw invalid_state("measure_position: state carries zero total probability");
  }
  const double r = 1.0 / std::sqrt(p_chosen);
  const Qubit q{state.a(chosen) * r, state.b(chosen) * r};
  state.collapse_to(chosen, q);
  return chosen;
}

std::pair<int, SpinorField> measure_position(const SpinorField& state, double u) {
  SpinorField post = state;
  const int site = measure_position_inplace(post, u);
  return {site, std::move(post)};
}

std::pair<int, Qubit> measure_chirality_y(const Qubit& q, double u) {
  const double n2 = q.norm2();
  if (std::abs(n2 - 1.0) > 1e-9)
    throw std::invalid_argument("measure_chirality_y: qubit norm^2 is " +
                                std::to_string(n2) + ", expected 1");
  // Probability of outcome +1: |<+|psi>|^2 with <+| = (1, -i)/sqrt(2),
  // i.e. |up - i*down|^2 / 2.
  const Amplitude overlap = q.up - Amplitude{0.0, 1.0} * q.down;
  const double p_plus = 0.5 * std::norm(overlap);
  const int sign = (u < p_plus) ? 1 : -1;
  return {sign, Qubit::chirality_y(sign)};
}

CollapseOutcome measure_collapse(const SpinorField& state, double u_position,
                                 double u_chirality) {
  SpinorField post = state;
  const int site = measure_position_inplace(post, u_position);
  const auto [sign, eigen] = measure_chirality_y(post.qubit_at(site), u_chirality);
  post.collapse_to(site, eigen);
  return CollapseOutcome{site, sign, std::move(post)};
}

Distribution master_step(const Distribution& P, const KernelQ& kernel) {
  const double ps = P.sum();
  if (std::abs(ps - 1.0) > 1e-6)
    throw std::invalid_argument("master_step: input sums to " + std::to_string(ps) +
                                ", expected 1 within 1e-6");
  const Distribution& q = kernel.q;
  Distribution out;
  out.first_site = P.first_site + q.first_site;
  out.p.assign(P.p.size() + q.p.size() - 1, 0.0);
  for (std::size_t j = 0; j < P.p.size(); ++j) {
    const double w = P.p[j];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < q.p.size(); ++i) out.p[j + i] += w * q.p[i];
  }
  return out;
}

double d_rm_periodic(const KernelQ& kernel) {
  if (kernel.period < 1)
    throw std::invalid_argument("d_rm_periodic: kernel period must be >= 1");
  return kernel.sigma_q2 / (2.0 * kernel.period);
}

double d_rm_periodic(int period, double quadratic_c) {
  if (period < 1) throw std::invalid_argument("d_rm_periodic: period must be >= 1");
  return quadratic_c * period / 2.0;
}

double d_rm_random(const MeasurementSchedule& schedule, double quadratic_c) {
  return quadratic_c * schedule.mean_square_interval() /
         (2.0 * schedule.mean_interval());
}

TrajectoryRecord run_measured_trajectory(const MeasurementSchedule& schedule,
                                         int steps, const CoinOperator& coin,
                                         const Qubit& initial, int initial_position,
                                         Xoshiro256StarStar& rng,
                                         std::span<const int> snapshot_times) {
  if (steps < 1)
    throw std::invalid_argument("run_measured_trajectory: steps must be >= 1");
  TrajectoryRecord rec;
  rec.m1.reserve(static_cast<std::size_t>(steps) + 1);
  rec.m2.reserve(static_cast<std::size_t>(steps) + 1);
  SpinorField state{initial, initial_position, steps};
  std::size_t snap_next = 0;
  auto record = [&](int t) {
    const Moments m = state.moments();
    rec.m1.push_back(m.m1);
    rec.m2.push_back(m.m2);
    while (snap_next < snapshot_times.size() && snapshot_times[snap_next] == t) {
      rec.snapshots.emplace_back(t, state.distribution());
      ++snap_next;
    }
  };
  record(0);
  std::size_t ordinal = 0;
  // Absolute time of the next measurement; a final partial interval simply
  // never fires.
  long next_measure = schedule.next_interval(ordinal, rng);
  for (int t = 1; t <= steps; ++t) {
    state.advance(coin);
    if (t == next_measure) {
      const double u_pos = rng.uniform01();
      const int site = measure_position_inplace(state, u_pos);
      const double u_chi = rng.uniform01();
      const auto [sign, eigen] = measure_chirality_y(state.qubit_at(site), u_chi);
      state.collapse_to(site, eigen);
      rec.measurements.push_back(MeasurementEvent{t, site, sign});
      ++ordinal;
      next_measure += schedule.next_interval(ordinal, rng);
    }
    record(t);
  }
  return rec;
}

}  // namespace qwline
