#pragma once

#include <memory>
#include <vector>

#include "fuelgame/core.hpp"

namespace fuelgame {

struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

// weight: standard normal density
QuadratureRule gauss_hermite(int n);
// weight: e^{-u} on [0, inf)
QuadratureRule gauss_laguerre(int n);

// p_N(x) = E int_0^inf e^{-a t} h(c x + s B_t) dt with c = (N-1)/N, s^2 = (N-1)/N
class DiscountedCost {
 public:
  DiscountedCost(CostFunction cost, Index players, double discount, int start_nodes = 64,
                 int max_nodes = 512, double rel_tol = 1e-9);

  double operator()(double x, int order = 0) const { return jet(x)[order]; }
  // p, p', p'', p'''
  Jet jet(double x) const;

  Index players() const { return n_; }
  double discount() const { return alpha_; }
  int nodes() const { return nodes_; }
  const CostFunction& cost() const { return cost_; }

 private:
  Jet jet_with(const std::vector<double>& w, const std::vector<double>& shift, double x) const;
  void build(int n, std::vector<double>& w, std::vector<double>& shift) const;

  CostFunction cost_;
  Index n_;
  double alpha_;
  double scale_;  // (N-1)/N
  int nodes_ = 0;
  std::vector<double> w_, shift_;
};

double p_eval(const CostFunction& cost, Index players, double discount, double x, int order);

inline double beta_of(Index players, double discount) {
  return 2.0 * double(players - 1) * discount / double(players);
}

// root of sqrt(b) tanh(x sqrt(b)) p'(x) = p''(x) on (0, inf)
double find_x0(const DiscountedCost& p);

struct TableOptions {
  double max_step_x = 0;  // 0: x0 / 400
  double max_step_y = 2e-3;
  double overshoot = 1.05;
};

// ascending in x; f decreasing from f(x.front()) >= overshoot * y_max down to f(x0) = 0
struct FrontierTable {
  std::vector<double> x, f, df;
};

FrontierTable solve_f_table(const DiscountedCost& p, double x0, double y_max, TableOptions opt = {});

class BoundarySolution {
 public:
  static BoundarySolution solve(const CostFunction& cost, Index players, double discount, double y_max,
                                TableOptions opt = {});

  Index players() const { return d_->p.players(); }
  double discount() const { return d_->p.discount(); }
  double beta() const { return d_->beta; }
  double x0() const { return d_->x0; }
  // largest y covered by the table
  double y_max() const { return d_->table.f.front(); }
  const DiscountedCost& p() const { return d_->p; }
  const FrontierTable& table() const { return d_->table; }

  // even, zero for |x| >= x0; coverage error below the table
  double f(double x) const;
  double f_prime(double x) const;
  double f_inverse(double y) const;
  double f_inverse_prime(double y) const;
  // A_N(y) and A_N'(y)
  double a_coefficient(double y) const;
  double a_coefficient_prime(double y) const;

 private:
  struct Data {
    DiscountedCost p;
    double beta;
    double x0;
    FrontierTable table;
  };
  explicit BoundarySolution(std::shared_ptr<const Data> d) : d_(std::move(d)) {}
  std::shared_ptr<const Data> d_;
};

double f_inverse(const FrontierTable& t, double y);
double a_coefficient(const DiscountedCost& p, double x_at);

}  // namespace fuelgame
