#include "fuelgame/boundary.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace fuelgame {

namespace {

QuadratureRule golub_welsch(const Vector& diag, const Vector& off) {
  const Index n = diag.size();
  Matrix j = Matrix::Zero(n, n);
  j.diagonal() = diag;
  j.diagonal(1) = off;
  j.diagonal(-1) = off;
  Eigen::SelfAdjointEigenSolver<Matrix> es(j);
  if (es.info() != Eigen::Success) throw NumericError("quadrature eigenproblem failed");
  QuadratureRule r;
  r.nodes = es.eigenvalues();
  r.weights = es.eigenvectors().row(0).transpose().array().square();
  return r;
}

struct Neumaier {
  double s = 0, c = 0;
  void add(double v) {
    const double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

double hermite_value(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
  const double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
         (t3 - t2) * h * d1;
}

double hermite_slope(double x0, double x1, double f0, double f1, double d0, double d1, double x) {
  const double h = x1 - x0, t = (x - x0) / h, t2 = t * t;
  return (6 * t2 - 6 * t) * (f0 - f1) / h + (3 * t2 - 4 * t + 1) * d0 + (3 * t2 - 2 * t) * d1;
}

// interval k with x[k] <= x <= x[k+1]
std::size_t locate_x(const FrontierTable& t, double x) {
  auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  std::size_t k = std::size_t(it - t.x.begin());
  k = k == 0 ? 0 : k - 1;
  return std::min(k, t.x.size() - 2);
}

// interval k with f[k] >= y >= f[k+1]
std::size_t locate_f(const FrontierTable& t, double y) {
  std::size_t lo = 0, hi = t.f.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (t.f[mid] >= y)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double invert_piece(const FrontierTable& t, std::size_t k, double y) {
  const double xa = t.x[k], xb = t.x[k + 1], fa = t.f[k], fb = t.f[k + 1];
  if (y == fa) return xa;
  if (y == fb) return xb;
  double lo = xa, hi = xb;  // H(lo) > y > H(hi)
  double x = xa + (fa - y) / (fa - fb) * (xb - xa);
  for (int it = 0; it < 100; ++it) {
    const double r = hermite_value(xa, xb, fa, fb, t.df[k], t.df[k + 1], x) - y;
    if (r == 0) return x;
    if (r > 0)
      lo = x;
    else
      hi = x;
    const double d = hermite_slope(xa, xb, fa, fb, t.df[k], t.df[k + 1], x);
    double nx = x - r / d;
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (nx == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) return nx;
    x = nx;
  }
  return x;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw NumericError("quadrature needs at least one node");
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(double(k));
  return golub_welsch(Vector::Zero(n), off);
}

QuadratureRule gauss_laguerre(int n) {
  if (n < 1) throw NumericError("quadrature needs at least one node");
  Vector diag(n), off(n - 1);
  for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1;
  for (int k = 1; k < n; ++k) off[k - 1] = k;
  return golub_welsch(diag, off);
}

DiscountedCost::DiscountedCost(CostFunction cost, Index players, double discount, int start_nodes,
                               int max_nodes, double rel_tol)
    : cost_(std::move(cost)), n_(players), alpha_(discount) {
  if (players < 2) throw DimensionError("need at least two players");
  if (!(discount > 0)) throw ModelError("discount rate must be positive");
  if (!cost_.jet) throw ModelError("cost has no evaluator");
  scale_ = double(n_ - 1) / double(n_);

  const double xs[] = {0.0, 0.3, 0.8, 1.7, 3.5};
  int n = start_nodes;
  build(n, w_, shift_);
  while (true) {
    if (2 * n > max_nodes) throw NumericError("p_N quadrature did not converge");
    std::vector<double> w2, s2;
    build(2 * n, w2, s2);
    bool ok = true;
    const double ref = std::abs(jet_with(w2, s2, 0.0)[2]);
    for (double x : xs) {
      const Jet a = jet_with(w_, shift_, x), b = jet_with(w2, s2, x);
      for (int m = 0; m < 4; ++m)
        if (std::abs(a[m] - b[m]) > rel_tol * std::max(std::abs(b[m]), 1e-3 * ref)) ok = false;
    }
    if (ok) break;
    n *= 2;
    w_ = std::move(w2);
    shift_ = std::move(s2);
  }
  nodes_ = n;
}

void DiscountedCost::build(int n, std::vector<double>& w, std::vector<double>& shift) const {
  // time integral of the Gaussian density is the kernel e^{-lam |z|} lam / (2 alpha)
  const QuadratureRule gl = gauss_laguerre(n);
  const double lam = std::sqrt(2 * alpha_ / scale_);
  w.clear();
  shift.clear();
  for (Index a = 0; a < gl.nodes.size(); ++a) {
    const double wt = gl.weights[a] / (2 * alpha_);
    if (wt < 1e-300) continue;
    for (double sgn : {1.0, -1.0}) {
      w.push_back(wt);
      shift.push_back(sgn * gl.nodes[a] / lam);
    }
  }
}

Jet DiscountedCost::jet_with(const std::vector<double>& w, const std::vector<double>& shift,
                             double x) const {
  Neumaier acc[4];
  const double cx = scale_ * x;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Jet h = cost_.jet(cx + shift[k]);
    for (int m = 0; m < 4; ++m) acc[m].add(w[k] * h[m]);
  }
  Jet out;
  double c = 1;
  for (int m = 0; m < 4; ++m) {
    out[m] = c * acc[m].value();
    c *= scale_;
  }
  return out;
}

Jet DiscountedCost::jet(double x) const { return jet_with(w_, shift_, x); }

double p_eval(const CostFunction& cost, Index players, double discount, double x, int order) {
  if (order < 0 || order > 3) throw DomainError("derivative order must be 0..3");
  return DiscountedCost(cost, players, discount)(x, order);
}

double find_x0(const DiscountedCost& p) {
  const double sb = std::sqrt(beta_of(p.players(), p.discount()));
  auto phi = [&](double x) {
    const Jet j = p.jet(x);
    return sb * std::tanh(x * sb) * j[1] - j[2];
  };
  double lo = 1e-8, hi = 1e3;
  double flo = phi(lo), fhi = phi(hi);
  if (!(flo < 0 && fhi > 0)) throw NumericError("no sign change for the intercept equation");
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = phi(mid);
    if (fm == 0) return mid;
    if (fm < 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

FrontierTable solve_f_table(const DiscountedCost& p, double x0, double y_max, TableOptions opt) {
  if (!(y_max > 0)) throw DomainError("table needs y_max > 0");
  if (!(x0 > 0)) throw DomainError("intercept must be positive");
  const double beta = beta_of(p.players(), p.discount());
  const double sb = std::sqrt(beta);
  const double hx = opt.max_step_x > 0 ? opt.max_step_x : x0 / 400;
  const double hy = opt.max_step_y;
  auto rhs = [&](double x) {
    const Jet j = p.jet(x);
    const double num = j[1] - j[3] / beta;
    const double den = j[2] / sb * std::tanh(x * sb) - j[1];
    const double d = num / den;
    if (!std::isfinite(d) || d >= 0) throw NumericError("frontier slope lost monotonicity");
    return d;
  };

  FrontierTable t;
  double x = x0, f = 0, d = rhs(x0);
  t.x.push_back(x);
  t.f.push_back(f);
  t.df.push_back(d);
  const double target = opt.overshoot * y_max;
  while (f < target) {
    double h = std::min(hx, hy / std::abs(d));
    h = std::min(h, 0.5 * x);
    if (h <= 1e-14 * x0) throw NumericError("frontier step underflow");
    // slope does not depend on f, so RK4 reduces to Simpson
    const double k1 = d;
    const double k2 = rhs(x - 0.5 * h);
    const double k4 = rhs(x - h);
    f -= h / 6 * (k1 + 4 * k2 + k4);
    x -= h;
    d = k4;
    t.x.push_back(x);
    t.f.push_back(f);
    t.df.push_back(d);
  }
  std::reverse(t.x.begin(), t.x.end());
  std::reverse(t.f.begin(), t.f.end());
  std::reverse(t.df.begin(), t.df.end());

  // Fritsch-Carlson guard
  for (std::size_t k = 0; k + 1 < t.x.size(); ++k) {
    const double sec = (t.f[k + 1] - t.f[k]) / (t.x[k + 1] - t.x[k]);
    const double a = t.df[k] / sec, b = t.df[k + 1] / sec;
    const double r = a * a + b * b;
    if (r > 9) {
      const double tau = 3 / std::sqrt(r);
      t.df[k] = tau * a * sec;
      t.df[k + 1] = tau * b * sec;
    }
  }
  return t;
}

double f_inverse(const FrontierTable& t, double y) {
  if (!(y >= 0)) throw DomainError("f_inverse needs y >= 0");
  if (y > t.f.front()) throw CoverageError("resource level beyond the frontier table");
  if (y == 0) return t.x.back();
  return invert_piece(t, locate_f(t, y), y);
}

double a_coefficient(const DiscountedCost& p, double x) {
  const double b = beta_of(p.players(), p.discount()), sb = std::sqrt(b);
  const Jet j = p.jet(x);
  return j[1] / sb * std::sinh(x * sb) - j[2] / b * std::cosh(x * sb);
}

BoundarySolution BoundarySolution::solve(const CostFunction& cost, Index players, double discount,
                                         double y_max, TableOptions opt) {
  DiscountedCost p(cost, players, discount);
  const double x0 = find_x0(p);
  FrontierTable t = solve_f_table(p, x0, y_max, opt);
  const double b = beta_of(players, discount);
  return BoundarySolution(std::make_shared<const Data>(Data{std::move(p), b, x0, std::move(t)}));
}

double BoundarySolution::f(double x) const {
  const FrontierTable& t = d_->table;
  const double a = std::abs(x);
  if (a >= d_->x0) return 0;
  if (a < t.x.front()) throw CoverageError("position below the frontier table");
  const std::size_t k = locate_x(t, a);
  return hermite_value(t.x[k], t.x[k + 1], t.f[k], t.f[k + 1], t.df[k], t.df[k + 1], a);
}

double BoundarySolution::f_prime(double x) const {
  const FrontierTable& t = d_->table;
  const double a = std::abs(x);
  if (a >= d_->x0) return 0;
  if (a < t.x.front()) throw CoverageError("position below the frontier table");
  const std::size_t k = locate_x(t, a);
  const double s = hermite_slope(t.x[k], t.x[k + 1], t.f[k], t.f[k + 1], t.df[k], t.df[k + 1], a);
  return x < 0 ? -s : s;
}

double BoundarySolution::f_inverse(double y) const { return fuelgame::f_inverse(d_->table, y); }

double BoundarySolution::f_inverse_prime(double y) const {
  const FrontierTable& t = d_->table;
  const double x = f_inverse(y);
  const std::size_t k = y == 0 ? t.x.size() - 2 : locate_f(t, y);
  return 1.0 / hermite_slope(t.x[k], t.x[k + 1], t.f[k], t.f[k + 1], t.df[k], t.df[k + 1], x);
}

double BoundarySolution::a_coefficient(double y) const {
  return fuelgame::a_coefficient(d_->p, f_inverse(y));
}

double BoundarySolution::a_coefficient_prime(double y) const {
  const double x = f_inverse(y), sb = std::sqrt(d_->beta);
  const Jet j = d_->p.jet(x);
  return -j[1] * std::cosh(x * sb) + j[2] / sb * std::sinh(x * sb);
}

}  // namespace fuelgame
