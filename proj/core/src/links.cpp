#include "qwline/links.hpp"

#include <cmath>
#include <string>

namespace qwline {

void sample_links_into(LinkConfig& cfg, int site_lo, int site_hi, double p,
                       Xoshiro256StarStar& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("sample_links: p must lie in [0, 1], got " +
                                std::to_string(p));
  if (site_hi < site_lo)
    throw std::invalid_argument("sample_links: empty site range");
  cfg.p = p;
  cfg.first_link = site_lo - 1;
  const std::size_t count = static_cast<std::size_t>(site_hi - site_lo + 2);
  cfg.broken.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    cfg.broken[i] = rng.bernoulli(p) ? 1 : 0;
}

LinkConfig sample_links(int site_lo, int site_hi, double p, Xoshiro256StarStar& rng) {
  LinkConfig cfg;
  sample_links_into(cfg, site_lo, site_hi, p, rng);
  return cfg;
}

SiteCase classify_site(const LinkConfig& links, int site) noexcept {
  const bool left = links.is_broken(site - 1);
  const bool right = links.is_broken(site);
  if (left && right) return SiteCase::Isolated;
  if (left) return SiteCase::LeftBroken;
  if (right) return SiteCase::RightBroken;
  return SiteCase::Intact;
}

void step_with_links(SpinorField& state, const LinkConfig& links,
                     const CoinOperator& coin) {
  state.advance_topology(coin, [&links](int link) noexcept {
    return links.is_broken(link);
  });
}

std::optional<double> coherence_time(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("coherence_time: p must lie in [0, 1], got " +
                                std::to_string(p));
  if (p == 0.0) return std::nullopt;
  return 1.0 / (p * std::sqrt(2.0));
}

double d_bl(double p, double K) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("d_bl: requires 0 < p < 1, got p = " + std::to_string(p));
  return K * (1.0 - p) / p;
}

TrajectoryRecord run_broken_link_trajectory(double p, int steps,
                                            const CoinOperator& coin,
                                            const Qubit& initial,
                                            int initial_position,
                                            Xoshiro256StarStar& rng,
                                            std::span<const int> snapshot_times) {
  if (steps < 1)
    throw std::invalid_argument("run_broken_link_trajectory: steps must be >= 1");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("run_broken_link_trajectory: p must lie in [0, 1]");
  TrajectoryRecord rec;
  rec.m1.reserve(static_cast<std::size_t>(steps) + 1);
  rec.m2.reserve(static_cast<std::size_t>(steps) + 1);
  SpinorField state{initial, initial_position, steps};
  LinkConfig links;
  links.broken.reserve(2 * static_cast<std::size_t>(steps) + 2);
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
  for (int t = 1; t <= steps; ++t) {
    sample_links_into(links, state.support_lo(), state.support_hi(), p, rng);
    step_with_links(state, links, coin);
    record(t);
  }
  return rec;
}

}  // namespace qwline
