#pragma once

// independent reference values: closed forms and adaptive quadrature from Boost,
// sharing no numerics with the library

#include <cmath>
#include <functional>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

// positive root of z tanh z = 1
inline double tanh_root() {
  double lo = 0.5, hi = 2.0;
  while (hi - lo > 1e-16 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (mid * std::tanh(mid) < 1 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double beta(int n, double alpha) { return 2.0 * (n - 1) * alpha / n; }

// h = x^2
inline double quad_p(double x, int n, double alpha) {
  const double c = double(n - 1) / n;
  return c * c * x * x / alpha + c / (alpha * alpha);
}

inline double quad_x0(int n, double alpha) { return tanh_root() * std::sqrt(n / (2.0 * (n - 1) * alpha)); }

// integral form of the quadratic boundary
inline double quad_f(double x, int n, double alpha) {
  const double x0 = quad_x0(n, alpha);
  const double a = std::abs(x);
  if (a >= x0) return 0.0;
  const double sb = std::sqrt(beta(n, alpha));
  auto g = [&](double z) {
    const double u = z * sb, u2 = u * u;
    // tanh(u)/u - 1 cancels for small u
    const double d = u < 0.05 ? u2 * (-1.0 / 3 + u2 * (2.0 / 15 + u2 * (-17.0 / 315 + u2 * 62.0 / 2835)))
                              : std::tanh(u) / u - 1.0;
    return 1.0 / d;
  };
  using boost::math::quadrature::gauss_kronrod;
  // integrate from x0 down to |x|
  return -gauss_kronrod<double, 61>::integrate(g, a, x0, 12, 1e-13);
}

// A_N at the boundary point x, reciprocal coefficient relative to the printed form
inline double quad_a(double x, int n, double alpha) {
  const double z = x * std::sqrt(beta(n, alpha));
  return -double(n - 1) / (n * alpha * alpha) * (std::cosh(z) - z * std::sinh(z));
}

// E int_0^inf e^{-a t} h(c x + s B_t) dt by nested adaptive quadrature
inline double discounted_cost(const std::function<double(double)>& h, double x, int n, double alpha) {
  const double c = double(n - 1) / n;
  const double s = std::sqrt(c);
  const double inv = 1.0 / std::sqrt(2 * boost::math::constants::pi<double>());
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double t) {
    if (t == 0) return h(c * x);
    const double sd = s * std::sqrt(t);
    auto g = [&](double z) { return inv * std::exp(-0.5 * z * z) * h(c * x + sd * z); };
    return gauss_kronrod<double, 61>::integrate(g, -12.0, 12.0, 15, 1e-13);
  };
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate([&](double t) { return std::exp(-alpha * t) * inner(t); }, 1e-12);
}

}  // namespace oracle
