#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qwline {

using Amplitude = std::complex<double>;

//! Thrown when a step would push amplitude beyond the allocated window.
struct capacity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Thrown when an operation is applied to a state it cannot act on
//! (e.g. measuring a state with zero total probability).
struct invalid_state : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Two-component internal (chirality) state attached to one lattice site.
//! `up` moves left under the shift, `down` moves right.
struct Qubit {
  Amplitude up{1.0, 0.0};
  Amplitude down{0.0, 0.0};

  double norm2() const noexcept { return std::norm(up) + std::norm(down); }

  //! (1, i)/sqrt(2): evolves with a left-right symmetric position spread.
  static Qubit symmetric() {
    const double r = std::sqrt(0.5);
    return Qubit{Amplitude{r, 0.0}, Amplitude{0.0, r}};
  }

  //! Chirality eigenstates along y: (1, +i)/sqrt(2) for sign=+1,
  //! (1, -i)/sqrt(2) for sign=-1.
  static Qubit chirality_y(int sign) {
    if (sign != 1 && sign != -1)
      throw std::invalid_argument("Qubit::chirality_y: sign must be +1 or -1");
    const double r = std::sqrt(0.5);
    return Qubit{Amplitude{r, 0.0}, Amplitude{0.0, sign * r}};
  }
};

//! One-parameter coin family sigma_z * exp(i theta sigma_y); every member is
//! the real matrix [[cos theta, sin theta], [sin theta, -cos theta]].
//! theta = pi/4 gives the Hadamard coin, theta = 0 gives sigma_z (a mirror
//! walk that never mixes chirality), theta = pi/2 gives sigma_x.
class CoinOperator {
 public:
  explicit CoinOperator(double theta)
      : theta_(theta), c_(std::cos(theta)), s_(std::sin(theta)) {
    if (!std::isfinite(theta))
      throw std::invalid_argument("CoinOperator: theta must be finite");
  }

  static const CoinOperator& hadamard() {
    static const CoinOperator coin{std::atan(1.0)};  // pi/4
    return coin;
  }

  double theta() const noexcept { return theta_; }

  //! Matrix entry m[row][col]; the family is real-valued.
  double entry(int row, int col) const {
    if (row < 0 || row > 1 || col < 0 || col > 1)
      throw std::out_of_range("CoinOperator::entry: index must be 0 or 1");
    if (row == 0) return col == 0 ? c_ : s_;
    return col == 0 ? s_ : -c_;
  }

  std::array<std::array<Amplitude, 2>, 2> matrix() const {
    return {{{Amplitude{c_, 0.0}, Amplitude{s_, 0.0}},
             {Amplitude{s_, 0.0}, Amplitude{-c_, 0.0}}}};
  }

  Qubit apply(const Qubit& q) const {
    return Qubit{c_ * q.up + s_ * q.down, s_ * q.up - c_ * q.down};
  }

 private:
  double theta_;
  double c_;
  double s_;
};

//! First and second moment plus variance of a position distribution.
struct Moments {
  double m1 = 0.0;
  double m2 = 0.0;
  double variance = 0.0;
};

//! Probability weights on consecutive lattice sites; p[i] belongs to site
//! first_site + i.
struct Distribution {
  std::vector<double> p;
  int first_site = 0;

  std::size_t size() const noexcept { return p.size(); }
  int site(std::size_t i) const noexcept { return first_site + static_cast<int>(i); }
  int last_site() const noexcept {
    return first_site + static_cast<int>(p.size()) - 1;
  }
  double sum() const noexcept {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
  }
  //! Weight at an absolute site index (0 outside the stored range).
  double at_site(int site) const noexcept {
    const long i = static_cast<long>(site) - first_site;
    if (i < 0 || i >= static_cast<long>(p.size())) return 0.0;
    return p[static_cast<std::size_t>(i)];
  }
};

//! Real values on consecutive lattice sites (interference terms, link flags...).
struct SiteSeries {
  std::vector<double> v;
  int first_site = 0;
};

//! Moments of a distribution; rejects inputs that are not normalized to
//! within 1e-6 so silent norm drift cannot corrupt variance series.
Moments moments(const Distribution& dist);

//! Full quantum state of the walk: a two-component spinor per site, stored in
//! a fixed window of 2*capacity+3 sites centred on the initial position.
//! `capacity` is the number of steps the state can absorb before the ballistic
//! light cone reaches the window edge; stepping past it throws capacity_error
//! before any mutation. The support interval [support_lo, support_hi] tracks
//! the light cone (it grows by one site per side per step and collapses to a
//! point on measurement) so stepping costs O(support), not O(window).
class SpinorField {
 public:
  SpinorField(const Qubit& initial, int position, int capacity);

  int time() const noexcept { return time_; }
  int capacity() const noexcept { return capacity_; }
  int support_lo() const noexcept { return lo_; }
  int support_hi() const noexcept { return hi_; }

  Amplitude a(int site) const noexcept;  //!< left-moving component at site
  Amplitude b(int site) const noexcept;  //!< right-moving component at site
  Qubit qubit_at(int site) const noexcept;

  double norm() const noexcept;                 //!< sum of |a|^2 + |b|^2
  double site_probability(int site) const noexcept;
  Distribution distribution() const;
  //! Interference terms beta_n = Re(a_n* b_n) over the support.
  SiteSeries beta_terms() const;
  //! Position moments of the current distribution (no normalization check;
  //! unitarity of the update is asserted by tests instead).
  Moments moments() const noexcept;

  //! One step: coin on every site, then the chirality-conditional shift.
  void advance(const CoinOperator& coin);

  //! One step on an arbitrary link topology. `broken(n)` must say whether the
  //! link between sites n and n+1 is absent this step. At a broken link the
  //! outgoing component is reflected into the opposite chirality on its own
  //! site instead of being transported, which keeps the update unitary.
  template <class BrokenLink>
  void advance_topology(const CoinOperator& coin, BrokenLink&& broken) {
    const int nlo = lo_ - 1;
    const int nhi = hi_ + 1;
    if (nlo + origin_ < 1 ||
        nhi + origin_ > static_cast<int>(a_.size()) - 2)
      throw capacity_error(
          "SpinorField::advance: light cone reached the storage window after " +
          std::to_string(time_) + " steps (capacity " +
          std::to_string(capacity_) + ")");
    const double m00 = coin.entry(0, 0);
    const double m01 = coin.entry(0, 1);
    const double m10 = coin.entry(1, 0);
    const double m11 = coin.entry(1, 1);
    // Clear scratch cells that are stale from an earlier, wider support.
    for (int n = scratch_lo_; n < nlo; ++n) {
      ta_[n + origin_] = Amplitude{};
      tb_[n + origin_] = Amplitude{};
    }
    for (int n = nhi + 1; n <= scratch_hi_; ++n) {
      ta_[n + origin_] = Amplitude{};
      tb_[n + origin_] = Amplitude{};
    }
    bool left_broken = broken(nlo - 1);
    for (int n = nlo; n <= nhi; ++n) {
      const int i = n + origin_;
      const bool right_broken = broken(n);
      // Coin output at site m: left-mover l_m = m00 a_m + m01 b_m,
      // right-mover r_m = m10 a_m + m11 b_m.
      ta_[i] = right_broken ? m10 * a_[i] + m11 * b_[i]
                            : m00 * a_[i + 1] + m01 * b_[i + 1];
      tb_[i] = left_broken ? m00 * a_[i] + m01 * b_[i]
                           : m10 * a_[i - 1] + m11 * b_[i - 1];
      left_broken = right_broken;
    }
    a_.swap(ta_);
    b_.swap(tb_);
    scratch_lo_ = lo_;
    scratch_hi_ = hi_;
    lo_ = nlo;
    hi_ = nhi;
    ++time_;
  }

  //! Replace the state by `q` localized at `site` (post-measurement state).
  //! `site` must lie inside the current support window; time is unchanged.
  void collapse_to(int site, const Qubit& q);

 private:
  int capacity_;
  int origin_;  // array index of lattice site 0
  int time_ = 0;
  int lo_;
  int hi_;
  int scratch_lo_ = 1;  // empty range: stale extent of (ta_, tb_)
  int scratch_hi_ = 0;
  std::vector<Amplitude> a_;
  std::vector<Amplitude> b_;
  std::vector<Amplitude> ta_;
  std::vector<Amplitude> tb_;
};

//! State localized at `position` with internal state `initial` (normalized
//! to within 1e-12, else invalid_state). `capacity` bounds the step count.
SpinorField new_state(const Qubit& initial, int position, int capacity);

//! Value-semantic single step (convenience over SpinorField::advance).
SpinorField step(SpinorField state, const CoinOperator& coin);

inline Distribution distribution(const SpinorField& state) { return state.distribution(); }
inline SiteSeries beta_terms(const SpinorField& state) { return state.beta_terms(); }

}  // namespace qwline
