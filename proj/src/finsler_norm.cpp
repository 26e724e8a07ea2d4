#include "anisomt/finsler_norm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

namespace anisomt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBoundDirections = 4096;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

// Golden-section search for a maximum of f on [lo, hi].
template <class Fn>
double golden_max(Fn&& f, double lo, double hi, double* arg = nullptr, int iters = 80) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  double best = std::max(f1, f2);
  if (arg) *arg = f1 > f2 ? x1 : x2;
  return best;
}

std::vector<Vec> sphere_directions(int dim, int count) {
  std::vector<Vec> dirs;
  dirs.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      double t = std::numbers::pi * k / count;  // evenness covers the other half
      dirs.push_back(vec2(std::cos(t), std::sin(t)));
    }
  } else if (dim == 3) {
    const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1.0 - (2.0 * k + 1.0) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back(vec3(r * std::cos(ga * k), r * std::sin(ga * k), z));
    }
  } else {
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> nd;
    for (int k = 0; k < count; ++k) {
      Vec v{};
      for (int i = 0; i < dim; ++i) v[i] = nd(rng);
      dirs.push_back(scaled(v, 1.0 / norm2(v, dim)));
    }
  }
  return dirs;
}

}  // namespace

std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::unsupported_dimension: return "UnsupportedDimension";
    case Errc::degenerate_norm: return "DegenerateNorm";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::sign_flip: return "SignFlip";
    case Errc::fit_unstable: return "FitUnstable";
    case Errc::domain_too_small: return "DomainTooSmall";
    case Errc::constants_mismatch: return "ConstantsMismatch";
    case Errc::saturation: return "Saturation";
    case Errc::config_error: return "ConfigError";
    case Errc::io_error: return "IoError";
  }
  return "Unknown";
}

std::string family_name(NormFamily f) {
  switch (f) {
    case NormFamily::euclidean: return "euclidean";
    case NormFamily::weighted_p_norm: return "p_norm";
    case NormFamily::quadratic_form: return "quadratic_form";
    case NormFamily::sampled_support: return "sampled_support";
  }
  return "unknown";
}

FinslerNorm FinslerNorm::euclidean(int dim) {
  if (dim < 2 || dim > kMaxDim)
    throw Error(Errc::unsupported_dimension, "dimension must be in [2, 4]");
  FinslerNorm n;
  n.family_ = NormFamily::euclidean;
  n.dim_ = dim;
  n.finish_construction();
  return n;
}

FinslerNorm FinslerNorm::weighted_p_norm(double p, std::vector<double> weights) {
  const int dim = static_cast<int>(weights.size());
  if (dim < 2 || dim > kMaxDim)
    throw Error(Errc::unsupported_dimension, "dimension must be in [2, 4]");
  if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "p must be >= 1");
  for (double w : weights)
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(Errc::invalid_argument, "weights must be positive");
  FinslerNorm n;
  n.family_ = NormFamily::weighted_p_norm;
  n.dim_ = dim;
  n.p_ = p;
  n.w_ = std::move(weights);
  n.finish_construction();
  return n;
}

FinslerNorm FinslerNorm::quadratic_form(int dim, std::vector<double> A) {
  if (dim < 2 || dim > kMaxDim)
    throw Error(Errc::unsupported_dimension, "dimension must be in [2, 4]");
  if (static_cast<int>(A.size()) != dim * dim)
    throw Error(Errc::invalid_argument, "matrix size does not match dimension");
  Eigen::MatrixXd M(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) M(i, j) = A[i * dim + j];
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * M.cwiseAbs().maxCoeff())
    throw Error(Errc::invalid_argument, "matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::invalid_argument, "matrix must be positive definite");
  Eigen::MatrixXd Minv = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
  FinslerNorm n;
  n.family_ = NormFamily::quadratic_form;
  n.dim_ = dim;
  n.A_ = std::move(A);
  n.Ainv_.resize(dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) n.Ainv_[i * dim + j] = 0.5 * (Minv(i, j) + Minv(j, i));
  n.finish_construction();
  return n;
}

FinslerNorm FinslerNorm::sampled_support(std::vector<double> angles, std::vector<double> support) {
  if (angles.size() != support.size() || angles.size() < 2)
    throw Error(Errc::invalid_argument, "need matching angle/support tables");
  for (double h : support)
    if (!(h > 0.0) || !std::isfinite(h))
      throw Error(Errc::invalid_argument, "support values must be positive");
  FinslerNorm n;
  n.family_ = NormFamily::sampled_support;
  n.dim_ = 2;
  n.angles_ = angles;
  n.hvals_ = support;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    Vec u = vec2(std::cos(angles[k]), std::sin(angles[k]));
    n.normals_.push_back(u);
    n.offsets_.push_back(support[k]);
    n.normals_.push_back(scaled(u, -1.0));
    n.offsets_.push_back(support[k]);
  }
  // Clip a large square by every half-plane (Sutherland-Hodgman).
  double big = 0.0;
  for (double h : support) big = std::max(big, h);
  big *= 1e3;
  std::vector<Vec> poly{vec2(-big, -big), vec2(big, -big), vec2(big, big), vec2(-big, big)};
  for (std::size_t k = 0; k < n.normals_.size(); ++k) {
    const Vec& u = n.normals_[k];
    const double h = n.offsets_[k];
    std::vector<Vec> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec& P = poly[i];
      const Vec& Q = poly[(i + 1) % poly.size()];
      double dp = dot(P, u, 2) - h, dq = dot(Q, u, 2) - h;
      if (dp <= 0.0) out.push_back(P);
      if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
        double s = dp / (dp - dq);
        out.push_back(add(P, scaled(sub(Q, P), s)));
      }
    }
    poly = std::move(out);
  }
  for (const Vec& v : poly)
    if (std::abs(v[0]) > 0.5 * big || std::abs(v[1]) > 0.5 * big)
      throw Error(Errc::invalid_argument, "support directions do not bound a convex body");
  n.vertices_ = std::move(poly);
  n.finish_construction();
  return n;
}

void FinslerNorm::finish_construction() {
  // a = min F, b = max F over unit directions.
  auto dirs = sphere_directions(dim_, kBoundDirections);
  double lo = kInf, hi = 0.0;
  std::size_t ilo = 0, ihi = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    double f = F(dirs[k]);
    if (f < lo) lo = f, ilo = k;
    if (f > hi) hi = f, ihi = k;
  }
  if (dim_ == 2) {
    const double step = std::numbers::pi / kBoundDirections;
    auto along = [&](double t) { return F(vec2(std::cos(t), std::sin(t))); };
    double t0 = std::numbers::pi * ilo / kBoundDirections;
    double t1 = std::numbers::pi * ihi / kBoundDirections;
    lo = std::min(lo, -golden_max([&](double t) { return -along(t); }, t0 - step, t0 + step));
    hi = std::max(hi, golden_max(along, t1 - step, t1 + step));
  } else {
    // Local coordinate search from the best sample.
    auto refine = [&](Vec v, double sign) {
      double best = sign * F(v);
      for (double s = 0.05; s > 1e-10; s *= 0.5) {
        bool moved = true;
        while (moved) {
          moved = false;
          for (int i = 0; i < dim_; ++i)
            for (double d : {-s, s}) {
              Vec w = v;
              w[i] += d;
              w = scaled(w, 1.0 / norm2(w, dim_));
              double f = sign * F(w);
              if (f > best) best = f, v = w, moved = true;
            }
        }
      }
      return sign * best;
    };
    lo = std::min(lo, refine(dirs[ilo], -1.0));
    hi = std::max(hi, refine(dirs[ihi], 1.0));
  }
  a_ = lo;
  b_ = hi;
}

double FinslerNorm::F(const Vec& xi) const {
  switch (family_) {
    case NormFamily::euclidean: return norm2(xi, dim_);
    case NormFamily::weighted_p_norm: {
      double m = 0.0;
      for (int i = 0; i < dim_; ++i) m = std::max(m, w_[i] * std::abs(xi[i]));
      if (m == 0.0 || std::isinf(p_)) return m;
      if (p_ == 1.0) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += w_[i] * std::abs(xi[i]);
        return s;
      }
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += std::pow(w_[i] * std::abs(xi[i]) / m, p_);
      return m * std::pow(s, 1.0 / p_);
    }
    case NormFamily::quadratic_form: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += xi[i] * A_[i * dim_ + j] * xi[j];
      return std::sqrt(std::max(0.0, s));
    }
    case NormFamily::sampled_support: {
      double m = -kInf;
      for (const Vec& v : vertices_) m = std::max(m, v[0] * xi[0] + v[1] * xi[1]);
      return std::max(0.0, m);
    }
  }
  return 0.0;
}

double FinslerNorm::polar(const Vec& x) const {
  switch (family_) {
    case NormFamily::euclidean: return norm2(x, dim_);
    case NormFamily::weighted_p_norm: {
      double m = 0.0;
      for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(x[i]) / w_[i]);
      if (m == 0.0 || p_ == 1.0) return m;
      if (std::isinf(p_)) {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += std::abs(x[i]) / w_[i];
        return s;
      }
      const double q = p_ / (p_ - 1.0);
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += std::pow(std::abs(x[i]) / w_[i] / m, q);
      return m * std::pow(s, 1.0 / q);
    }
    case NormFamily::quadratic_form: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) s += x[i] * Ainv_[i * dim_ + j] * x[j];
      return std::sqrt(std::max(0.0, s));
    }
    case NormFamily::sampled_support: return polar_sampled(x);
  }
  return 0.0;
}

// sup <x, xi>/F(xi) over directions: grid plus data directions, then golden refinement.
double FinslerNorm::polar_sampled(const Vec& x) const {
  if (x[0] == 0.0 && x[1] == 0.0) return 0.0;
  auto ratio = [&](double t) {
    Vec u = vec2(std::cos(t), std::sin(t));
    return dot(x, u, 2) / F(u);
  };
  double best = -kInf, targ = 0.0;
  const int grid = kBoundDirections;
  for (int k = 0; k < grid; ++k) {
    double t = 2.0 * std::numbers::pi * k / grid;
    double r = ratio(t);
    if (r > best) best = r, targ = t;
  }
  const double step = 2.0 * std::numbers::pi / grid;
  best = std::max(best, golden_max(ratio, targ - step, targ + step, nullptr, 60));
  for (const Vec& u : normals_) best = std::max(best, dot(x, u, 2) / F(u));
  return best;
}

Vec FinslerNorm::fd_gradient(double (FinslerNorm::*f)(const Vec&) const, const Vec& x) const {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, norm2(x, dim_));
  Vec g{};
  for (int i = 0; i < dim_; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = ((this->*f)(xp) - (this->*f)(xm)) / (2.0 * h);
  }
  return g;
}

Vec FinslerNorm::grad_F(const Vec& xi) const {
  if (norm2(xi, dim_) == 0.0) throw Error(Errc::zero_vector, "grad_F at the origin");
  Vec g{};
  switch (family_) {
    case NormFamily::euclidean: return scaled(xi, 1.0 / norm2(xi, dim_));
    case NormFamily::weighted_p_norm: {
      if (p_ == 1.0) {
        for (int i = 0; i < dim_; ++i) g[i] = w_[i] * sgn(xi[i]);
        return g;
      }
      if (std::isinf(p_)) {
        int k = 0;
        for (int i = 1; i < dim_; ++i)
          if (w_[i] * std::abs(xi[i]) > w_[k] * std::abs(xi[k])) k = i;
        g[k] = w_[k] * sgn(xi[k]);
        return g;
      }
      const double f = F(xi);
      for (int i = 0; i < dim_; ++i)
        g[i] = w_[i] * sgn(xi[i]) * std::pow(w_[i] * std::abs(xi[i]) / f, p_ - 1.0);
      return g;
    }
    case NormFamily::quadratic_form: {
      const double f = F(xi);
      for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += A_[i * dim_ + j] * xi[j];
        g[i] = s / f;
      }
      return g;
    }
    case NormFamily::sampled_support: return fd_gradient(&FinslerNorm::F, xi);
  }
  return g;
}

double FinslerNorm::F_grad(const Vec& xi, Vec& g) const {
  g = Vec{};
  if (norm2(xi, dim_) == 0.0) return 0.0;
  if (family_ == NormFamily::weighted_p_norm && p_ > 1.0 && std::isfinite(p_)) {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, w_[i] * std::abs(xi[i]));
    // t_i = (w_i |xi_i| / m)^(p-1); integer p avoids pow
    const int ip = int(p_);
    const bool integral = double(ip) == p_ && ip <= 8;
    double t[kMaxDim], s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double a = w_[i] * std::abs(xi[i]) / m;
      double ti = 1.0;
      if (integral)
        for (int k = 1; k < ip; ++k) ti *= a;
      else
        ti = a > 0.0 ? std::pow(a, p_ - 1.0) : 0.0;
      t[i] = ti;
      s += ti * a;
    }
    const double root = integral && ip == 2 ? std::sqrt(s) : std::pow(s, 1.0 / p_);
    const double inv = root / s;  // s^{-(p-1)/p}
    for (int i = 0; i < dim_; ++i) g[i] = w_[i] * sgn(xi[i]) * t[i] * inv;
    return m * root;
  }
  g = grad_F(xi);
  return F(xi);
}

Vec FinslerNorm::grad_polar(const Vec& x) const {
  if (norm2(x, dim_) == 0.0) throw Error(Errc::zero_vector, "grad_polar at the origin");
  Vec g{};
  switch (family_) {
    case NormFamily::euclidean: return scaled(x, 1.0 / norm2(x, dim_));
    case NormFamily::weighted_p_norm: {
      if (std::isinf(p_)) {
        for (int i = 0; i < dim_; ++i) g[i] = sgn(x[i]) / w_[i];
        return g;
      }
      if (p_ == 1.0) {
        int k = 0;
        for (int i = 1; i < dim_; ++i)
          if (std::abs(x[i]) / w_[i] > std::abs(x[k]) / w_[k]) k = i;
        g[k] = sgn(x[k]) / w_[k];
        return g;
      }
      const double q = p_ / (p_ - 1.0);
      const double f = polar(x);
      for (int i = 0; i < dim_; ++i)
        g[i] = sgn(x[i]) / w_[i] * std::pow(std::abs(x[i]) / w_[i] / f, q - 1.0);
      return g;
    }
    case NormFamily::quadratic_form: {
      const double f = polar(x);
      for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim_; ++j) s += Ainv_[i * dim_ + j] * x[j];
        g[i] = s / f;
      }
      return g;
    }
    case NormFamily::sampled_support: return fd_gradient(&FinslerNorm::polar, x);
  }
  return g;
}

bool FinslerNorm::analytic_gradient() const { return family_ != NormFamily::sampled_support; }

bool FinslerNorm::pde_supported() const {
  if (family_ == NormFamily::sampled_support) return false;
  if (family_ == NormFamily::weighted_p_norm && (p_ == 1.0 || std::isinf(p_))) return false;
  return true;
}

bool FinslerNorm::is_quadratic() const {
  if (family_ == NormFamily::euclidean || family_ == NormFamily::quadratic_form) return true;
  if (family_ == NormFamily::weighted_p_norm && p_ == 2.0) return true;
  return false;
}

std::vector<double> FinslerNorm::quadratic_matrix() const {
  std::vector<double> M(dim_ * dim_, 0.0);
  if (family_ == NormFamily::quadratic_form) return A_;
  for (int i = 0; i < dim_; ++i)
    M[i * dim_ + i] = family_ == NormFamily::weighted_p_norm ? w_[i] * w_[i] : 1.0;
  return M;
}

std::string FinslerNorm::describe() const {
  std::ostringstream os;
  os << family_name(family_) << "(dim=" << dim_;
  if (family_ == NormFamily::weighted_p_norm) {
    os << ", p=" << p_ << ", w=[";
    for (std::size_t i = 0; i < w_.size(); ++i) os << (i ? "," : "") << w_[i];
    os << "]";
  } else if (family_ == NormFamily::quadratic_form) {
    os << ", A=[";
    for (std::size_t i = 0; i < A_.size(); ++i) os << (i ? "," : "") << A_[i];
    os << "]";
  } else if (family_ == NormFamily::sampled_support) {
    os << ", directions=" << angles_.size();
  }
  os << ")";
  return os.str();
}

double eval_F(const FinslerNorm& norm, const Vec& xi) { return norm.F(xi); }
Vec grad_F(const FinslerNorm& norm, const Vec& xi) { return norm.grad_F(xi); }
double polar(const FinslerNorm& norm, const Vec& x) {
  if (norm2(x, norm.dim()) == 0.0) throw Error(Errc::zero_vector, "polar at the origin");
  return norm.polar(x);
}

double kappa_n(const FinslerNorm& norm) {
  const int n = norm.dim();
  if (n == 2) {
    // 1/2 int rho^2, rho = 1/F°(cos, sin); composite Simpson, 4096 panels.
    constexpr int panels = 4096;
    const double h = 2.0 * std::numbers::pi / panels;
    auto g = [&](int k) {
      double t = k * h;
      double r = 1.0 / norm.polar(vec2(std::cos(t), std::sin(t)));
      return r * r;
    };
    double s = g(0) + g(panels);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k);
    return 0.5 * s * h / 3.0;
  }
  if (n == 3) {
    // 1/3 int_{S^2} rho^3: Gauss in cos(theta) on 8 slabs, trapezoid in azimuth.
    constexpr int azimuth = 512;
    auto ring = [&](double t) {
      double s = std::sqrt(std::max(0.0, 1.0 - t * t));
      double acc = 0.0;
      for (int k = 0; k < azimuth; ++k) {
        double ph = 2.0 * std::numbers::pi * k / azimuth;
        double r = 1.0 / norm.polar(vec3(s * std::cos(ph), s * std::sin(ph), t));
        acc += r * r * r;
      }
      return acc * 2.0 * std::numbers::pi / azimuth;
    };
    double total = 0.0;
    constexpr int slabs = 8;
    for (int j = 0; j < slabs; ++j) {
      double lo = -1.0 + 2.0 * j / slabs, hi = lo + 2.0 / slabs;
      total += boost::math::quadrature::gauss<double, 30>::integrate(ring, lo, hi);
    }
    return total / 3.0;
  }
  throw Error(Errc::unsupported_dimension, "kappa_n supports n in {2, 3}");
}

double lambda_n(const FinslerNorm& norm) {
  const double n = norm.dim();
  return std::pow(n, n / (n - 1.0)) * std::pow(kappa_n(norm), 1.0 / (n - 1.0));
}

double DualityReport::max_violation() const {
  return std::max({triangle, gradient_bounds, euler, unit_dual, inversion, sign_homog});
}

DualityReport duality_check(const FinslerNorm& norm, int samples, std::uint64_t seed) {
  if (samples < 1) throw Error(Errc::invalid_argument, "samples must be >= 1");
  const int n = norm.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ut(0.1, 3.0);
  auto draw = [&] {
    Vec v{};
    for (int i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
  };
  DualityReport r;
  r.samples = samples;
  r.analytic = norm.analytic_gradient();
  const double a = norm.a(), b = norm.b();
  for (int s = 0; s < samples; ++s) {
    Vec x = draw(), y = draw();
    const double fx = norm.F(x), fy = norm.F(y), fxy = norm.F(add(x, y));
    const double scale = fx + fy;
    r.triangle = std::max({r.triangle, (fxy - scale) / scale, (std::abs(fx - fy) - fxy) / scale});

    const Vec gF = norm.grad_F(x), gP = norm.grad_polar(x);
    const double ngF = norm2(gF, n), ngP = norm2(gP, n);
    r.gradient_bounds = std::max({r.gradient_bounds, (a - ngF) / b, (ngF - b) / b,
                                  (1.0 / b - ngP) * a, (ngP - 1.0 / a) * a});

    const double px = norm.polar(x);
    r.euler = std::max({r.euler, std::abs(dot(x, gF, n) - fx) / fx,
                        std::abs(dot(x, gP, n) - px) / px});

    r.unit_dual = std::max({r.unit_dual, std::abs(norm.F(gP) - 1.0), std::abs(norm.polar(gF) - 1.0)});

    const Vec inv = scaled(norm.grad_F(gP), px);
    r.inversion = std::max(r.inversion, norm2(sub(inv, x), n) / norm2(x, n));

    double t = ut(rng) * (nd(rng) < 0.0 ? -1.0 : 1.0);
    const Vec gt = norm.grad_F(scaled(x, t));
    r.sign_homog = std::max(r.sign_homog, norm2(sub(gt, scaled(gF, t > 0 ? 1.0 : -1.0)), n) / ngF);
  }
  r.triangle = std::max(0.0, r.triangle);
  r.gradient_bounds = std::max(0.0, r.gradient_bounds);
  return r;
}

}  // namespace anisomt
