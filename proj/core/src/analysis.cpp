#include "qwline/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

namespace qwline {

namespace {

// Trajectories are accumulated in fixed-size chunks and chunk sums are merged
// in ascending chunk order, so the floating-point result is a pure function
// of the spec (independent of thread count). The chunk size is therefore part
// of the result definition: do not change it casually.
constexpr int kChunkSize = 32;

struct ChunkAccum {
  // Per time step: sums over trajectories of m1, m2, m1^2, m2^2, m1*m2.
  std::vector<double> s1, s2, s11, s22, s12;
  // Per snapshot time: summed window of site probabilities.
  std::vector<std::vector<double>> snap;
  std::vector<std::vector<MeasurementEvent>> logs;

  explicit ChunkAccum(std::size_t n_times, std::size_t n_snaps, std::size_t window)
      : s1(n_times, 0.0),
        s2(n_times, 0.0),
        s11(n_times, 0.0),
        s22(n_times, 0.0),
        s12(n_times, 0.0),
        snap(n_snaps, std::vector<double>(window, 0.0)) {}

  void add(const TrajectoryRecord& rec, int window_first_site) {
    for (std::size_t t = 0; t < rec.m1.size(); ++t) {
      const double m1 = rec.m1[t];
      const double m2 = rec.m2[t];
      s1[t] += m1;
      s2[t] += m2;
      s11[t] += m1 * m1;
      s22[t] += m2 * m2;
      s12[t] += m1 * m2;
    }
    for (std::size_t k = 0; k < rec.snapshots.size(); ++k) {
      const Distribution& d = rec.snapshots[k].second;
      std::vector<double>& w = snap[k];
      const long off = static_cast<long>(d.first_site) - window_first_site;
      for (std::size_t i = 0; i < d.p.size(); ++i)
        w[static_cast<std::size_t>(off + static_cast<long>(i))] += d.p[i];
    }
  }
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  std::size_t n = 0;
};

LinearFit ols_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit f;
  f.n = x.size();
  if (f.n < 2) return f;
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(f.n);
  const double my = sy / static_cast<double>(f.n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < f.n; ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (f.n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < f.n; ++i) {
      const double r = y[i] - (f.intercept + f.slope * x[i]);
      sse += r * r;
    }
    f.slope_se = std::sqrt(sse / static_cast<double>(f.n - 2) / sxx);
  }
  return f;
}

void validate_spec(const EnsembleSpec& spec) {
  if (spec.steps < 1)
    throw std::invalid_argument("ensemble_run: steps must be >= 1");
  if (spec.trajectories < 1)
    throw std::invalid_argument("ensemble_run: trajectories must be >= 1");
  if (spec.model == Model::broken_links || spec.model == Model::classical) {
    if (!(spec.p >= 0.0 && spec.p <= 1.0))
      throw std::invalid_argument("ensemble_run: p must lie in [0, 1]");
  }
  if (!std::is_sorted(spec.snapshot_times.begin(), spec.snapshot_times.end()))
    throw std::invalid_argument("ensemble_run: snapshot_times must be ascending");
  for (int t : spec.snapshot_times)
    if (t < 0 || t > spec.steps)
      throw std::invalid_argument("ensemble_run: snapshot time " +
                                  std::to_string(t) + " outside [0, steps]");
}

EnsembleResult deterministic_run(const EnsembleSpec& spec) {
  EnsembleResult out;
  const std::size_t n_times = static_cast<std::size_t>(spec.steps) + 1;
  out.series.times.resize(n_times);
  for (std::size_t t = 0; t < n_times; ++t)
    out.series.times[t] = static_cast<int>(t);
  out.series.sigma2.reserve(n_times);
  out.series.ensemble_size = 1;
  std::size_t snap_next = 0;
  auto maybe_snapshot = [&](int t, const Distribution& d) {
    while (snap_next < spec.snapshot_times.size() &&
           spec.snapshot_times[snap_next] == t) {
      out.snapshots.push_back(DistributionSnapshot{t, d});
      ++snap_next;
    }
  };
  if (spec.model == Model::coherent) {
    const CoinOperator coin{spec.theta};
    SpinorField state{spec.initial_qubit, spec.initial_position, spec.steps};
    for (int t = 0; t <= spec.steps; ++t) {
      if (t > 0) state.advance(coin);
      const Moments m = state.moments();
      out.series.sigma2.push_back(m.variance);
      maybe_snapshot(t, state.distribution());
    }
  } else {  // classical
    ClassicalDistribution d = classical_delta(spec.p, spec.initial_position);
    for (int t = 0; t <= spec.steps; ++t) {
      if (t > 0) d = classical_step(d);
      const Moments m = moments(d.dist);
      out.series.sigma2.push_back(m.variance);
      maybe_snapshot(t, d.dist);
    }
  }
  out.series.standard_errors.assign(n_times, 0.0);
  out.series.sigma2_traj_mean = out.series.sigma2;
  return out;
}

}  // namespace

EnsembleResult ensemble_run(const EnsembleSpec& spec, int threads) {
  validate_spec(spec);
  if (spec.model == Model::coherent || spec.model == Model::classical)
    return deterministic_run(spec);

  const std::size_t n_times = static_cast<std::size_t>(spec.steps) + 1;
  const std::size_t n_snaps = spec.snapshot_times.size();
  // Window that contains every reachable site at any snapshot time.
  const std::size_t window = 2 * static_cast<std::size_t>(spec.steps) + 1;
  const int window_first_site = spec.initial_position - spec.steps;
  const int n_traj = spec.trajectories;
  const int n_chunks = (n_traj + kChunkSize - 1) / kChunkSize;
  const CoinOperator coin{spec.theta};

  std::vector<ChunkAccum> chunks;
  chunks.reserve(static_cast<std::size_t>(n_chunks));
  for (int c = 0; c < n_chunks; ++c)
    chunks.emplace_back(n_times, n_snaps, n_snaps ? window : 0);

  const bool keep_logs = spec.keep_measurements && spec.model == Model::measured;
  auto run_chunk = [&](int c) {
    ChunkAccum& acc = chunks[static_cast<std::size_t>(c)];
    const int first = c * kChunkSize;
    const int last = std::min(first + kChunkSize, n_traj);
    for (int i = first; i < last; ++i) {
      Xoshiro256StarStar rng =
          trajectory_rng(spec.master_seed, static_cast<std::uint64_t>(i));
      TrajectoryRecord rec =
          spec.model == Model::measured
              ? run_measured_trajectory(spec.schedule, spec.steps, coin,
                                        spec.initial_qubit, spec.initial_position,
                                        rng, spec.snapshot_times)
              : run_broken_link_trajectory(spec.p, spec.steps, coin,
                                           spec.initial_qubit,
                                           spec.initial_position, rng,
                                           spec.snapshot_times);
      acc.add(rec, window_first_site);
      if (keep_logs) acc.logs.push_back(std::move(rec.measurements));
    }
  };

  int n_workers = threads > 0
                      ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, n_chunks);
  if (n_workers <= 1) {
    for (int c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    for (auto& th : pool) th.join();
  }

  // Merge chunk sums in ascending chunk order (bit-exact determinism).
  ChunkAccum total(n_times, n_snaps, n_snaps ? window : 0);
  for (const ChunkAccum& c : chunks) {
    for (std::size_t t = 0; t < n_times; ++t) {
      total.s1[t] += c.s1[t];
      total.s2[t] += c.s2[t];
      total.s11[t] += c.s11[t];
      total.s22[t] += c.s22[t];
      total.s12[t] += c.s12[t];
    }
    for (std::size_t k = 0; k < n_snaps; ++k)
      for (std::size_t i = 0; i < window; ++i) total.snap[k][i] += c.snap[k][i];
  }

  EnsembleResult out;
  out.confinement_dominated = spec.model == Model::broken_links && spec.p > 0.5;
  const double N = static_cast<double>(n_traj);
  out.series.ensemble_size = n_traj;
  out.series.times.resize(n_times);
  out.series.sigma2.resize(n_times);
  out.series.standard_errors.resize(n_times);
  out.series.sigma2_traj_mean.resize(n_times);
  for (std::size_t t = 0; t < n_times; ++t) {
    out.series.times[t] = static_cast<int>(t);
    const double mu1 = total.s1[t] / N;
    const double mu2 = total.s2[t] / N;
    // Variance of the ensemble-averaged distribution.
    out.series.sigma2[t] = mu2 - mu1 * mu1;
    out.series.sigma2_traj_mean[t] = mu2 - total.s11[t] / N;
    if (n_traj > 1) {
      const double denom = N - 1.0;
      const double var1 = std::max(0.0, (total.s11[t] - N * mu1 * mu1) / denom);
      const double var2 = std::max(0.0, (total.s22[t] - N * mu2 * mu2) / denom);
      const double cov = (total.s12[t] - N * mu1 * mu2) / denom;
      // Delta method for sigma2 = mu2 - mu1^2.
      const double v =
          (var2 + 4.0 * mu1 * mu1 * var1 - 4.0 * mu1 * cov) / N;
      out.series.standard_errors[t] = std::sqrt(std::max(0.0, v));
    } else {
      out.series.standard_errors[t] = 0.0;
    }
  }
  out.snapshots.reserve(n_snaps);
  for (std::size_t k = 0; k < n_snaps; ++k) {
    const std::vector<double>& w = total.snap[k];
    std::size_t lo = 0, hi = w.size();
    while (lo < hi && w[lo] == 0.0) ++lo;
    while (hi > lo && w[hi - 1] == 0.0) --hi;
    DistributionSnapshot snap;
    snap.time = spec.snapshot_times[k];
    if (lo < hi) {
      snap.dist.first_site = window_first_site + static_cast<int>(lo);
      snap.dist.p.assign(w.begin() + static_cast<long>(lo),
                         w.begin() + static_cast<long>(hi));
      for (double& x : snap.dist.p) x /= N;
    }
    out.snapshots.push_back(std::move(snap));
  }
  if (keep_logs) {
    out.measurement_logs.reserve(static_cast<std::size_t>(n_traj));
    for (ChunkAccum& c : chunks)
      for (auto& log : c.logs) out.measurement_logs.push_back(std::move(log));
  }
  return out;
}

QuadraticFit fit_quadratic_coefficient(const VarianceSeries& series, int t_from,
                                       int t_to) {
  if (t_from < 10)
    throw std::invalid_argument(
        "fit_quadratic_coefficient: window must start at t >= 10");
  if (t_to < t_from)
    throw std::invalid_argument("fit_quadratic_coefficient: empty window");
  double st2y = 0.0, st4 = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t_from || t > t_to) continue;
    const double t2 = t * t;
    st2y += t2 * series.sigma2[i];
    st4 += t2 * t2;
    ++n;
  }
  if (n == 0)
    throw std::invalid_argument(
        "fit_quadratic_coefficient: no samples inside the window");
  QuadraticFit f;
  f.C = st2y / st4;
  double ss_res = 0.0, ss_val = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t_from || t > t_to) continue;
    const double r = series.sigma2[i] - f.C * t * t;
    ss_res += r * r;
    ss_val += series.sigma2[i] * series.sigma2[i];
  }
  f.relative_residual = ss_val > 0.0 ? std::sqrt(ss_res / ss_val) : 0.0;
  f.poor_fit = f.relative_residual > 0.05;
  return f;
}

DiffusionFit fit_diffusion(const VarianceSeries& series, int tail_from,
                           int tail_to) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const int t = series.times[i];
    if (t < tail_from || t > tail_to) continue;
    x.push_back(static_cast<double>(t));
    y.push_back(series.sigma2[i]);
  }
  if (x.size() < 10)
    throw std::invalid_argument("fit_diffusion: tail window holds " +
                                std::to_string(x.size()) +
                                " samples, need at least 10");
  const LinearFit f = ols_line(x, y);
  DiffusionFit d;
  d.slope = f.slope;
  d.intercept = f.intercept;
  d.D = 0.5 * f.slope;
  const double half_ci = 1.96 * 0.5 * f.slope_se;
  d.ci_low = d.D - half_ci;
  d.ci_high = d.D + half_ci;
  return d;
}

namespace {

double brownian_sse(const std::vector<double>& t, const std::vector<double>& y,
                    const BrownianParams& p) {
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - brownian_variance(p, t[i]);
    sse += r * r;
  }
  return sse;
}

}  // namespace

BrownianFit fit_brownian(const VarianceSeries& series,
                         std::optional<double> fixed_C) {
  std::vector<double> t, y;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] < 1) continue;
    t.push_back(static_cast<double>(series.times[i]));
    y.push_back(series.sigma2[i]);
  }
  if (t.size() < 10)
    throw std::invalid_argument("fit_brownian: need at least 10 samples at t >= 1");

  // Deterministic initial guess: C from a single-parameter quadratic fit over
  // the first tenth of the time span, gamma from 2C / (late-time slope).
  const double t_max = t.back();
  const double t_early = std::max(t.front(), t_max / 10.0);
  double st2y = 0.0, st4 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > t_early) continue;
    st2y += t[i] * t[i] * y[i];
    st4 += t[i] * t[i] * t[i] * t[i];
  }
  double c0 = fixed_C ? *fixed_C : (st4 > 0.0 ? st2y / st4 : 0.0);
  if (!(c0 > 0.0)) c0 = y.back() / (t_max * t_max);
  if (!(c0 > 0.0)) c0 = 1e-3;
  std::vector<double> xt, yt;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.75 * t_max) continue;
    xt.push_back(t[i]);
    yt.push_back(y[i]);
  }
  const LinearFit tail = ols_line(xt, yt);
  double g0 = tail.slope > 0.0 ? 2.0 * c0 / tail.slope : 10.0 / t_max;
  if (!(g0 > 0.0) || !std::isfinite(g0)) g0 = 10.0 / t_max;

  BrownianParams p{c0, g0};
  const bool fit_c = !fixed_C.has_value();
  double sse = brownian_sse(t, y, p);
  constexpr int kMaxIter = 200;
  constexpr double kStepTol = 1e-10;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    // Finite-difference Jacobian of residuals r_i = y_i - f(t_i; p).
    const double hc = 1e-7 * std::max(std::abs(p.C), 1e-8);
    const double hg = 1e-7 * std::max(std::abs(p.gamma), 1e-8);
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f0 = brownian_variance(p, t[i]);
      const double r = y[i] - f0;
      double jc = 0.0;
      if (fit_c) {
        BrownianParams pc{p.C + hc, p.gamma};
        jc = (brownian_variance(pc, t[i]) - f0) / hc;
      }
      BrownianParams pg{p.C, p.gamma + hg};
      const double jg = (brownian_variance(pg, t[i]) - f0) / hg;
      jtj00 += jc * jc;
      jtj01 += jc * jg;
      jtj11 += jg * jg;
      jtr0 += jc * r;
      jtr1 += jg * r;
    }
    double dc = 0.0, dg = 0.0;
    if (fit_c) {
      const double det = jtj00 * jtj11 - jtj01 * jtj01;
      if (det == 0.0 || !std::isfinite(det))
        throw fit_error("fit_brownian: singular normal equations at iteration " +
                        std::to_string(iter));
      dc = (jtj11 * jtr0 - jtj01 * jtr1) / det;
      dg = (jtj00 * jtr1 - jtj01 * jtr0) / det;
    } else {
      if (jtj11 == 0.0 || !std::isfinite(jtj11))
        throw fit_error("fit_brownian: singular normal equations at iteration " +
                        std::to_string(iter));
      dg = jtr1 / jtj11;
    }
    // Damping: halve the step until the objective improves.
    double scale = 1.0;
    bool accepted = false;
    BrownianParams cand = p;
    double cand_sse = sse;
    for (int h = 0; h < 30; ++h) {
      cand.C = std::max(fit_c ? p.C + scale * dc : p.C, 1e-12);
      cand.gamma = std::max(p.gamma + scale * dg, 1e-12);
      cand_sse = brownian_sse(t, y, cand);
      if (cand_sse <= sse) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;  // no descent direction left: converged
    const double rel_step =
        std::max(std::abs(cand.C - p.C) / std::max(std::abs(p.C), 1e-12),
                 std::abs(cand.gamma - p.gamma) / std::max(std::abs(p.gamma), 1e-12));
    p = cand;
    sse = cand_sse;
    if (rel_step < kStepTol) break;
  }
  if (iter >= kMaxIter)
    throw fit_error("fit_brownian: no convergence after " +
                    std::to_string(kMaxIter) +
                    " iterations (sse = " + std::to_string(sse) + ")");
  BrownianFit out;
  out.params = p;
  out.residual_norm = std::sqrt(sse / static_cast<double>(t.size()));
  out.iterations = iter + 1;
  out.fixed_C = !fit_c;
  return out;
}

GaussianityReport gaussianity(const Distribution& dist) {
  const double s = dist.sum();
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument("gaussianity: distribution sums to " +
                                std::to_string(s) + ", expected 1 within 1e-6");
  double mu = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i)
    mu += dist.p[i] * static_cast<double>(dist.site(i));
  double var = 0.0, m4 = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    const double d = static_cast<double>(dist.site(i)) - mu;
    var += dist.p[i] * d * d;
    m4 += dist.p[i] * d * d * d * d;
  }
  if (!(var > 0.0))
    throw std::invalid_argument("gaussianity: zero variance");
  GaussianityReport rep;
  rep.excess_kurtosis = m4 / (var * var) - 3.0;

  // Which sublattice carries the probability?
  double even_mass = 0.0, odd_mass = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    if (dist.site(i) % 2 == 0)
      even_mass += dist.p[i];
    else
      odd_mass += dist.p[i];
  }
  const bool single_parity = std::min(even_mass, odd_mass) < 1e-12;
  const int spacing = single_parity ? 2 : 1;
  const int wanted_parity =
      even_mass >= odd_mass ? 0 : 1;  // only used when single_parity
  const double sigma = std::sqrt(var);
  // Moment-matched Gaussian weights on the compared sites, renormalized over
  // them so the comparison is between two unit-mass vectors.
  std::vector<double> pv, ev;
  double ez = 0.0;
  for (std::size_t i = 0; i < dist.p.size(); ++i) {
    const int n = dist.site(i);
    if (single_parity && ((n % 2 + 2) % 2) != wanted_parity) continue;
    const double z = (static_cast<double>(n) - mu) / sigma;
    const double e = std::exp(-0.5 * z * z) * spacing / (sigma * 2.5066282746310002);
    pv.push_back(dist.p[i]);
    ev.push_back(e);
    ez += e;
  }
  rep.sites_compared = static_cast<int>(pv.size());
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double e = ev[i] / ez;
    if (e < 1e-300) continue;
    const double d = pv[i] - e;
    rep.chi_square += d * d / e;
  }
  return rep;
}

std::optional<CrossoverEstimate> crossover_time(const VarianceSeries& series,
                                                double threshold,
                                                double window_fraction) {
  if (!(threshold > 0.0))
    throw std::invalid_argument("crossover_time: threshold must be positive");
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    throw std::invalid_argument("crossover_time: window fraction must lie in (0, 1)");
  if (series.times.empty()) return std::nullopt;
  const int t_max = series.times.back();
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const int t = series.times[i];
    if (t < 1) continue;
    const double w_lo = (1.0 - window_fraction) * t;
    const double w_hi = (1.0 + window_fraction) * t;
    if (w_hi > static_cast<double>(t_max)) break;  // window no longer centered
    std::vector<double> lx, ly;
    bool usable = true;
    for (std::size_t j = 0; j < series.times.size(); ++j) {
      const int tj = series.times[j];
      if (tj < w_lo || tj > w_hi) continue;
      if (tj < 1 || !(series.sigma2[j] > 0.0)) {
        usable = false;
        break;
      }
      lx.push_back(std::log(static_cast<double>(tj)));
      ly.push_back(std::log(series.sigma2[j]));
    }
    if (!usable || lx.size() < 3) continue;
    const LinearFit f = ols_line(lx, ly);
    if (f.slope < threshold)
      return CrossoverEstimate{static_cast<double>(t), threshold, window_fraction};
  }
  return std::nullopt;
}

}  // namespace qwline
