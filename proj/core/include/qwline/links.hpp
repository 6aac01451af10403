#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qwline/measure.hpp"
#include "qwline/rng.hpp"
#include "qwline/walk.hpp"

namespace qwline {

//! Default slope of the broken-link diffusion law D = K (1-p)/p. Fits that
//! re-estimate K report their own value; this constant is only a default.
inline constexpr double kBrokenLinkK = 0.40;

//! Broken/intact flags for one time step. Entry i describes the link between
//! sites (first_link + i) and (first_link + i + 1); links outside the stored
//! window are intact.
struct LinkConfig {
  int first_link = 0;
  std::vector<std::uint8_t> broken;
  double p = 0.0;

  bool is_broken(int link) const noexcept {
    const long i = static_cast<long>(link) - first_link;
    return i >= 0 && i < static_cast<long>(broken.size()) && broken[i] != 0;
  }
  int last_link() const noexcept {
    return first_link + static_cast<int>(broken.size()) - 1;
  }
};

//! The four situations a site can face, determined by its two adjacent links.
enum class SiteCase { Intact, LeftBroken, RightBroken, Isolated };

//! Bernoulli(p) sample of every link adjacent to sites in [site_lo, site_hi],
//! i.e. links with left endpoints site_lo - 1 through site_hi, drawn in
//! ascending link order (one uniform draw per link, always).
LinkConfig sample_links(int site_lo, int site_hi, double p, Xoshiro256StarStar& rng);

//! As sample_links, but reuses the storage of `cfg`.
void sample_links_into(LinkConfig& cfg, int site_lo, int site_hi, double p,
                       Xoshiro256StarStar& rng);

SiteCase classify_site(const LinkConfig& links, int site) noexcept;

//! One walk step on the sampled topology (coin, then flux-conserving
//! transport that respects broken links).
void step_with_links(SpinorField& state, const LinkConfig& links,
                     const CoinOperator& coin = CoinOperator::hadamard());

//! Coherence time 1/(p sqrt(2)); nullopt for p = 0 (never decoheres).
std::optional<double> coherence_time(double p);

//! Broken-link diffusion coefficient K (1-p)/p; domain 0 < p < 1.
double d_bl(double p, double K = kBrokenLinkK);

//! One trajectory of the broken-link walk: per step, sample a fresh topology
//! over the light cone (plus one margin link each side), then step on it.
//! Each trajectory is unitary; decoherence appears only in ensemble averages.
TrajectoryRecord run_broken_link_trajectory(double p, int steps,
                                            const CoinOperator& coin,
                                            const Qubit& initial,
                                            int initial_position,
                                            Xoshiro256StarStar& rng,
                                            std::span<const int> snapshot_times = {});

}  // namespace qwline
