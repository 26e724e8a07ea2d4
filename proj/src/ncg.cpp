#include "anisomt/ncg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <fmt/format.h>

namespace anisomt {

TelemetrySink csv_sink(std::ostream& os) {
  os << "iteration,energy,residual\n";
  return [&os](const IterRecord& r) {
    os << fmt::format("{},{:.17g},{:.17g}\n", r.iteration, r.energy, r.residual);
  };
}

namespace {

struct Point {
  std::vector<double> x, g;
  double e = 0.0;
};

}  // namespace

NcgResult ncg_minimize(const Objective& obj, std::span<double> x, const NcgOptions& opt,
                       const kernels::Table& k) {
  const std::size_t n = x.size();
  NcgResult res;
  std::vector<double> g(n), p(n), gprev(n);
  Point trial{std::vector<double>(n), std::vector<double>(n)};
  Point lo{std::vector<double>(n), std::vector<double>(n)};

  auto eval = [&](std::span<const double> at, std::span<double> grad) {
    ++res.evaluations;
    return obj(at, grad);
  };
  auto residual = [&](const std::vector<double>& gg) {
    return opt.residual_scale * k.max_abs(gg.data(), n);
  };

  double e = eval(x, g);
  double r = residual(g);
  for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
  double t_prev = 0.0, d_prev = 0.0;
  int since_refresh = 0;
  const double noise_rel = 1e-14;

  for (int it = 0;; ++it) {
    res.iterations = it;
    if (opt.sink && it % std::max(1, opt.telemetry_every) == 0) opt.sink({it, e, r});
    if (r < opt.tol) {
      if (opt.quadratic && since_refresh > 0) {
        e = eval(x, g);
        r = residual(g);
        since_refresh = 0;
        if (r >= opt.tol) {
          for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
          continue;
        }
      }
      res.converged = true;
      break;
    }
    if (it >= opt.max_iter) break;

    double d0 = k.dot(g.data(), p.data(), n);
    if (!(d0 < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
      d0 = k.dot(g.data(), p.data(), n);
      if (!(d0 < 0.0)) {
        res.converged = r < opt.tol;
        break;
      }
    }
    const double pmax = k.max_abs(p.data(), n);
    double t = t_prev > 0.0 ? t_prev * d_prev / d0 : 1.0 / std::max(1.0, pmax);
    if (!(t > 0.0) || !std::isfinite(t)) t = 1.0 / std::max(1.0, pmax);

    std::copy(g.begin(), g.end(), gprev.begin());
    bool accepted = false;
    double t_acc = 0.0;

    // trial point helper
    auto probe = [&](double tt) {
      std::copy(x.begin(), x.end(), trial.x.begin());
      k.axpy(tt, p.data(), trial.x.data(), n);
      trial.e = eval(trial.x, trial.g);
      return k.dot(trial.g.data(), p.data(), n);
    };

    if (opt.quadratic) {
      const double dt = probe(t);
      const double curv = (dt - d0) / t;  // p^T H p
      if (curv > 0.0) {
        const double ts = -d0 / curv;
        k.axpy(ts, p.data(), x.data(), n);
        const double w = ts / t;
        for (std::size_t i = 0; i < n; ++i) g[i] = gprev[i] + w * (trial.g[i] - gprev[i]);
        e = e + ts * d0 + 0.5 * ts * ts * curv;
        t_acc = ts;
        accepted = true;
        if (++since_refresh >= opt.refresh_every) {
          e = eval(x, g);
          since_refresh = 0;
        }
      }
    }

    if (!accepted) {
      double t_lo = 0.0, d_lo = d0, t_hi = std::numeric_limits<double>::infinity(), d_hi = 0.0;
      bool have_lo = false;
      const double noise = noise_rel * std::abs(e) + std::numeric_limits<double>::min();
      for (int trialn = 0; trialn < 60; ++trialn) {
        const double dt = probe(t);
        const bool armijo = trial.e <= e + opt.armijo * t * d0 + noise;
        if (armijo && std::abs(dt) <= opt.curvature * std::abs(d0)) {
          std::copy(trial.x.begin(), trial.x.end(), x.begin());
          std::copy(trial.g.begin(), trial.g.end(), g.begin());
          e = trial.e;
          t_acc = t;
          accepted = true;
          break;
        }
        if (!armijo || dt > 0.0) {
          t_hi = t;
          d_hi = dt;
        } else {
          t_lo = t;
          d_lo = dt;
          have_lo = true;
          std::swap(lo.x, trial.x);
          std::swap(lo.g, trial.g);
          lo.e = trial.e;
        }
        if (std::isfinite(t_hi)) {
          const double w = t_hi - t_lo;
          double ts = (d_hi > d_lo) ? t_lo - d_lo * w / (d_hi - d_lo) : t_lo + 0.5 * w;
          if (!std::isfinite(ts)) ts = t_lo + 0.5 * w;
          t = std::clamp(ts, t_lo + 1e-3 * w, t_hi - 1e-3 * w);
          if (w <= 1e-16 * std::max(1.0, t_hi)) break;
        } else {
          double ts = (dt > d0) ? t * d0 / (d0 - dt) : 4.0 * t;
          t = std::clamp(ts, 1.5 * t, 20.0 * t);
        }
      }
      if (!accepted && have_lo) {
        std::copy(lo.x.begin(), lo.x.end(), x.begin());
        std::copy(lo.g.begin(), lo.g.end(), g.begin());
        e = lo.e;
        t_acc = t_lo;
        accepted = true;
      }
      since_refresh = 0;
    }

    if (!accepted) {
      // No progress possible along p. Retry once along -g, else give up.
      if (t_prev < 0.0) break;
      for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
      t_prev = -1.0;
      continue;
    }

    r = residual(g);
    // Polak-Ribiere+
    double num = 0.0, den = 0.0;
    num = k.dot(g.data(), g.data(), n) - k.dot(g.data(), gprev.data(), n);
    den = k.dot(gprev.data(), gprev.data(), n);
    double beta = den > 0.0 ? std::max(0.0, num / den) : 0.0;
    d_prev = d0;
    t_prev = t_acc;
    k.dir_update(beta, g.data(), p.data(), n);
  }
  res.energy = e;
  res.residual = r;
  return res;
}

}  // namespace anisomt
