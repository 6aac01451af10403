#include "qwline/walk.hpp"

#include <cmath>

namespace qwline {

Moments moments(const Distribution& dist) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    const double w = dist.p[i];
    const double n = static_cast<double>(dist.site(i));
    s0 += w;
    s1 += n * w;
    s2 += n * n * w;
  }
  if (std::abs(s0 - 1.0) > 1e-6)
    throw invalid_state("moments: distribution sums to " + std::to_string(s0) +
                        ", expected 1 within 1e-6");
  Moments m;
  m.m1 = s1;
  m.m2 = s2;
  m.variance = s2 - s1 * s1;
  return m;
}

SpinorField::SpinorField(const Qubit& initial, int position, int capacity)
    : capacity_(capacity), lo_(position), hi_(position) {
  if (capacity < 0)
    throw std::invalid_argument("SpinorField: capacity must be non-negative");
  const double n2 = initial.norm2();
  if (std::abs(n2 - 1.0) > 1e-12)
    throw invalid_state("SpinorField: initial qubit norm^2 is " +
                        std::to_string(n2) + ", expected 1 within 1e-12");
  // Window: capacity sites each side of `position`, plus one sentinel cell
  // per side that stays zero so the stepping loop never reads out of range.
  const std::size_t window = 2 * static_cast<std::size_t>(capacity) + 3;
  origin_ = capacity + 1 - position;
  a_.assign(window, Amplitude{});
  b_.assign(window, Amplitude{});
  ta_.assign(window, Amplitude{});
  tb_.assign(window, Amplitude{});
  a_[static_cast<std::size_t>(position + origin_)] = initial.up;
  b_[static_cast<std::size_t>(position + origin_)] = initial.down;
  scratch_lo_ = position;
  scratch_hi_ = position - 1;  // empty: scratch arrays hold only zeros
}

Amplitude SpinorField::a(int site) const noexcept {
  const long i = static_cast<long>(site) + origin_;
  if (i < 0 || i >= static_cast<long>(a_.size())) return Amplitude{};
  return a_[static_cast<std::size_t>(i)];
}

Amplitude SpinorField::b(int site) const noexcept {
  const long i = static_cast<long>(site) + origin_;
  if (i < 0 || i >= static_cast<long>(b_.size())) return Amplitude{};
  return b_[static_cast<std::size_t>(i)];
}

Qubit SpinorField::qubit_at(int site) const noexcept {
  return Qubit{a(site), b(site)};
}

double SpinorField::norm() const noexcept {
  double s = 0.0;
  for (int n = lo_; n <= hi_; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + origin_);
    s += std::norm(a_[i]) + std::norm(b_[i]);
  }
  return s;
}

double SpinorField::site_probability(int site) const noexcept {
  return std::norm(a(site)) + std::norm(b(site));
}

Distribution SpinorField::distribution() const {
  Distribution d;
  d.first_site = lo_;
  d.p.resize(static_cast<std::size_t>(hi_ - lo_ + 1));
  for (int n = lo_; n <= hi_; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + origin_);
    d.p[static_cast<std::size_t>(n - lo_)] = std::norm(a_[i]) + std::norm(b_[i]);
  }
  return d;
}

SiteSeries SpinorField::beta_terms() const {
  SiteSeries s;
  s.first_site = lo_;
  s.v.resize(static_cast<std::size_t>(hi_ - lo_ + 1));
  for (int n = lo_; n <= hi_; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + origin_);
    s.v[static_cast<std::size_t>(n - lo_)] =
        (std::conj(a_[i]) * b_[i]).real();
  }
  return s;
}

Moments SpinorField::moments() const noexcept {
  double s1 = 0.0, s2 = 0.0;
  for (int n = lo_; n <= hi_; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + origin_);
    const double w = std::norm(a_[i]) + std::norm(b_[i]);
    const double x = static_cast<double>(n);
    s1 += x * w;
    s2 += x * x * w;
  }
  Moments m;
  m.m1 = s1;
  m.m2 = s2;
  m.variance = s2 - s1 * s1;
  return m;
}

void SpinorField::advance(const CoinOperator& coin) {
  advance_topology(coin, [](int) noexcept { return false; });
}

void SpinorField::collapse_to(int site, const Qubit& q) {
  if (site < lo_ || site > hi_)
    throw std::invalid_argument(
        "SpinorField::collapse_to: site " + std::to_string(site) +
        " lies outside the support [" + std::to_string(lo_) + ", " +
        std::to_string(hi_) + "]");
  for (int n = lo_; n <= hi_; ++n) {
    const std::size_t i = static_cast<std::size_t>(n + origin_);
    a_[i] = Amplitude{};
    b_[i] = Amplitude{};
  }
  const std::size_t i = static_cast<std::size_t>(site + origin_);
  a_[i] = q.up;
  b_[i] = q.down;
  lo_ = site;
  hi_ = site;
}

SpinorField new_state(const Qubit& initial, int position, int capacity) {
  return SpinorField{initial, position, capacity};
}

SpinorField step(SpinorField state, const CoinOperator& coin) {
  state.advance(coin);
  return state;
}

}  // namespace qwline
