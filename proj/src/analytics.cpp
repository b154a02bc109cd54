// Copyright 2026 The joinlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "joinlab/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "joinlab/errors.hpp"

namespace joinlab {

double bernoulli_weight_square_sum(std::optional<int> K) {
  if (!K) return 5.0 / 48.0;
  require(*K >= 0, "bernoulli: K must be >= 0");
  double s = std::ldexp(1.0, -4);
  for (int k = 1; k <= *K; ++k) s += 2.0 * std::ldexp(1.0, -2 * k - 4);
  return s;
}

double bernoulli_var_R(std::optional<int> K) {
  return 0.25 * bernoulli_weight_square_sum(K);
}

double bernoulli_mean_R(std::optional<int> K) {
  if (!K) return 0.375;
  double s = 0.25;
  for (int k = 1; k <= *K; ++k) s += 2.0 * std::ldexp(1.0, -k - 2);
  return 0.5 * s;
}

double bernoulli_certificate_value(std::optional<int> K) {
  return 2.0 / (3.0 * std::numbers::sqrt2) * 2.0 * bernoulli_var_R(K);
}

double bernoulli_lipschitz_normalization() { return 3.0 * std::numbers::sqrt2 / 2.0; }

double doubling_var_Am(std::size_t m) {
  require(m >= 1, "doubling_var_Am: m must be >= 1");
  return 1.0 / (48.0 * static_cast<double>(m));
}

RateBounds doubling_rate_bounds(std::size_t m) {
  require(m >= 1, "doubling_rate_bounds: m must be >= 1");
  const double md = static_cast<double>(m);
  return {1.0 / (24.0 * std::numbers::sqrt2 * md), 1.0 / std::sqrt(24.0 * md)};
}

namespace {

double circle_f(double u) {
  u -= std::floor(u);
  return std::min(u, 1.0 - u);
}

// Periodic trapezoid rule on [0,1).
template <typename F>
double periodic_trapezoid(F&& f, std::size_t points) {
  double acc = 0.0;
  const double h = 1.0 / static_cast<double>(points);
  for (std::size_t k = 0; k < points; ++k) acc += f(static_cast<double>(k) * h);
  return acc * h;
}

}  // namespace

double circle_moment_quadrature(int power, std::size_t points) {
  return periodic_trapezoid([power](double u) { return std::pow(circle_f(u), power); },
                            points);
}

double doubling_covariance_quadrature(int s, int t, std::size_t points) {
  const double ss = std::ldexp(1.0, s);
  const double tt = std::ldexp(1.0, t);
  const double cross = periodic_trapezoid(
      [&](double u) { return circle_f(ss * u) * circle_f(tt * u); }, points);
  const double ms = periodic_trapezoid([&](double u) { return circle_f(ss * u); }, points);
  const double mt = periodic_trapezoid([&](double u) { return circle_f(tt * u); }, points);
  return cross - ms * mt;
}

double gaussian_abs_diff_quadrature(double sigma, std::size_t points) {
  require(sigma > 0.0, "gaussian_abs_diff_quadrature: sigma must be positive");
  const double s = std::numbers::sqrt2 * sigma;  // sd of G - G'
  // Composite Simpson on [0, 12 s], doubled by symmetry; the kink of |x|
  // sits on the endpoint.
  const std::size_t n = points + points % 2;
  const double hi = 12.0 * s;
  const double h = hi / static_cast<double>(n);
  auto g = [s](double x) {
    return x * std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
  };
  double acc = g(0.0) + g(hi);
  for (std::size_t k = 1; k < n; ++k) acc += (k % 2 == 1 ? 4.0 : 2.0) * g(static_cast<double>(k) * h);
  return 2.0 * acc * h / 3.0;
}

MarkovSpectrum markov_spectrum(const Matrix& transition, std::optional<Matrix> h) {
  MarkovSpectrum out;
  out.transition = transition;
  out.stationary = validate_reversible_chain(transition);
  const auto n = static_cast<Eigen::Index>(transition.size());
  const Eigen::Index nn = n * n;

  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p(i, j) = transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::VectorXd pi(n);
  for (Eigen::Index i = 0; i < n; ++i) pi(i) = out.stationary[static_cast<std::size_t>(i)];
  const Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();

  // theta from the symmetrized single-chain operator.
  const Eigen::MatrixXd sym =
      sqrt_pi.asDiagonal() * p * sqrt_pi.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd sym_s = 0.5 * (sym + sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> single(sym_s);
  std::vector<double> eig(single.eigenvalues().data(), single.eigenvalues().data() + n);
  std::sort(eig.begin(), eig.end());
  eig.pop_back();  // the Perron eigenvalue 1
  for (double a : eig) out.theta = std::max(out.theta, std::fabs(a));

  Eigen::MatrixXd hm(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      hm(i, j) = h ? (*h).at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j))
                   : (i != j ? 1.0 : 0.0);
    }
  }
  const Eigen::MatrixXd weight = pi * pi.transpose();  // Pi(i,j)
  const double mean_h = (weight.array() * hm.array()).sum();
  const Eigen::MatrixXd centered = hm.array() - mean_h;
  out.v_h = (weight.array() * centered.array().square()).sum();

  // Series: gamma_t = <hbar, R^t hbar>_Pi with (R w)(i,j) = (P W P^T)(i,j).
  double sigma2 = out.v_h;
  Eigen::MatrixXd w = centered;
  constexpr std::size_t kMaxTerms = 100000;
  std::size_t t = 1;
  for (; t <= kMaxTerms; ++t) {
    w = p * w * p.transpose();
    sigma2 += 2.0 * (weight.array() * centered.array() * w.array()).sum();
    if (std::pow(out.theta, static_cast<double>(t)) * out.v_h < 1e-14) break;
  }
  out.sigma_h2_series = sigma2;
  out.series_terms = std::min(t, kMaxTerms);

  // Spectral: eigenbasis of the symmetrized product operator.
  Eigen::MatrixXd sym_r(nn, nn);
  for (Eigen::Index a = 0; a < nn; ++a)
    for (Eigen::Index b = 0; b < nn; ++b)
      sym_r(a, b) = sym_s(a / n, b / n) * sym_s(a % n, b % n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> product(sym_r);
  Eigen::VectorXd scaled(nn);
  for (Eigen::Index a = 0; a < nn; ++a) {
    scaled(a) = std::sqrt(weight(a / n, a % n)) * centered(a / n, a % n);
  }
  double spectral = 0.0;
  for (Eigen::Index k = 0; k < nn; ++k) {
    const double rho = product.eigenvalues()(k);
    if (rho > 1.0 - 1e-12) continue;  // constants; orthogonal to hbar
    const double c = product.eigenvectors().col(k).dot(scaled);
    spectral += (1.0 + rho) / (1.0 - rho) * c * c;
  }
  out.sigma_h2_spectral = spectral;
  return out;
}

MarkovRateBounds markov_rate_bounds(const MarkovSpectrum& spectrum, std::size_t m) {
  require(m >= 1, "markov_rate_bounds: m must be >= 1");
  const double md = static_cast<double>(m);
  const double sigma = std::sqrt(spectrum.sigma_h2_spectral);
  MarkovRateBounds b;
  b.upper = std::sqrt(2.0 * spectrum.v_h * (1.0 + spectrum.theta) /
                      (md * (1.0 - spectrum.theta)));
  b.asymptotic_lower_scaled = std::numbers::sqrt2 * sigma / std::sqrt(std::numbers::pi);
  b.eventual_lower = sigma / std::sqrt(2.0 * std::numbers::pi * md);
  return b;
}

double markov_abs_diff_limit(const MarkovSpectrum& spectrum) {
  return 2.0 * std::sqrt(spectrum.sigma_h2_spectral) / std::sqrt(std::numbers::pi);
}

ExactArrayLaw cyclic_exact_law(const Joining& joining, const ArraySpec& spec,
                               std::size_t cap) {
  spec.validate();
  require(joining.has_finite_support(), "cyclic_exact_law: joining " + joining.id() +
                                            " has no finite support");
  const auto support = joining.finite_support();
  double tuples = std::pow(static_cast<double>(support.size()), static_cast<double>(spec.n));
  if (tuples > static_cast<double>(cap)) {
    throw CapExceeded("cyclic_exact_law: enumeration exceeds the cap");
  }
  const auto& sx = *joining.left();
  const auto& sy = *joining.right();

  // Orbits of every support atom.
  struct AtomOrbit {
    std::vector<State> x, y;
  };
  std::vector<AtomOrbit> orbits(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    State x = support[k].x, y = support[k].y;
    for (std::size_t a = 0; a < spec.m; ++a) {
      orbits[k].x.push_back(x);
      orbits[k].y.push_back(y);
      x = sx.exact_step(x);
      y = sy.exact_step(y);
    }
  }
  std::vector<State> ax, ay;
  for (std::size_t r = 1; r <= spec.R; ++r) {
    ax.push_back(sx.anchor(r));
    ay.push_back(sy.anchor(r));
  }

  ExactArrayLaw law{spec, {}};
  std::vector<std::size_t> idx(spec.n, 0);
  std::vector<Rational> key(spec.size());
  while (true) {
    Rational mass = 1;
    for (auto i : idx) mass *= support[i].mass;
    for (std::size_t i = 0; i < spec.n; ++i) {
      const auto& oi = orbits[idx[i]];
      for (std::size_t j = 0; j < spec.n; ++j) {
        const auto& oj = orbits[idx[j]];
        for (std::size_t a = 0; a < spec.m; ++a)
          for (std::size_t b = 0; b < spec.m; ++b) {
            key[spec.dx_index(i, j, a, b)] = sx.exact_dist(oi.x[a], oj.x[b]);
            key[spec.dy_index(i, j, a, b)] = sy.exact_dist(oi.y[a], oj.y[b]);
          }
      }
      for (std::size_t a = 0; a < spec.m; ++a)
        for (std::size_t r = 0; r < spec.R; ++r) {
          key[spec.ax_index(i, a, r)] = sx.exact_dist(oi.x[a], ax[r]);
          key[spec.ay_index(i, a, r)] = sy.exact_dist(oi.y[a], ay[r]);
        }
    }
    law.atoms[key] += mass;
    std::size_t pos = spec.n;
    while (pos > 0 && ++idx[pos - 1] == support.size()) idx[--pos] = 0;
    if (pos == 0) break;
  }
  return law;
}

Rational exact_expectation(const ExactArrayLaw& law,
                           const std::function<Rational(const std::vector<Rational>&)>& f) {
  Rational acc = 0;
  for (const auto& [key, mass] : law.atoms) acc += mass * f(key);
  return acc;
}

nlohmann::json constants_table() {
  using nlohmann::json;
  json rows = json::array();
  auto add = [&rows](const std::string& name, double value, const std::string& formula,
                     const std::string& route) {
    rows.push_back({{"name", name}, {"value", value}, {"formula", formula}, {"route", route}});
  };
  const double sqrt2 = std::numbers::sqrt2;
  add("bernoulli.diameter", 0.75, "sum_k 2^{-|k|-2} = 3/4", "closed form");
  add("bernoulli.weight_square_sum", bernoulli_weight_square_sum(), "5/48", "closed form");
  add("bernoulli.weight_square_sum.K24", bernoulli_weight_square_sum(24), "sum_{|k|<=24}",
      "finite sum");
  add("bernoulli.var_R", bernoulli_var_R(), "5/192", "closed form");
  add("bernoulli.two_var_R", 2.0 * bernoulli_var_R(), "5/96", "closed form");
  add("bernoulli.lipschitz_normalization", bernoulli_lipschitz_normalization(),
      "3 sqrt2 / 2", "closed form");
  add("bernoulli.certificate", bernoulli_certificate_value(), "5/(144 sqrt2)",
      "closed form");
  add("bernoulli.certificate.K24", bernoulli_certificate_value(24),
      "(2/(3 sqrt2)) 2 Var(R_24)", "finite sum");
  add("circle.mean_f", circle_moment_quadrature(1), "1/4", "trapezoid 2^20");
  add("circle.second_moment_f", circle_moment_quadrature(2), "1/12", "trapezoid 2^20");
  add("doubling.var_f", circle_moment_quadrature(2) - std::pow(circle_moment_quadrature(1), 2),
      "1/12 - 1/16 = 1/48", "trapezoid 2^20");
  for (std::size_t m : {1, 4, 16, 64}) {
    const auto b = doubling_rate_bounds(m);
    add("doubling.var_A.m" + std::to_string(m), doubling_var_Am(m), "1/(48 m)", "closed form");
    add("doubling.w1_lower.m" + std::to_string(m), b.lower, "1/(24 sqrt2 m)", "closed form");
    add("doubling.w1_upper.m" + std::to_string(m), b.upper, "1/sqrt(24 m)", "closed form");
  }
  const Matrix p{{0.7, 0.3}, {0.3, 0.7}};
  const auto spec = markov_spectrum(p);
  add("markov2.theta", spec.theta, "|1 - 2a|, a = 0.3", "symmetric eigensolver");
  add("markov2.v_h", spec.v_h, "Var_{pi x pi} 1{i != j}", "direct");
  add("markov2.sigma_h2.series", spec.sigma_h2_series, "v_h + 2 sum_t gamma_t",
      "covariance series");
  add("markov2.sigma_h2.spectral", spec.sigma_h2_spectral,
      "sum (1+rho)/(1-rho) ||E_rho hbar||^2", "product eigenbasis");
  add("markov2.abs_diff_limit", markov_abs_diff_limit(spec), "2 sigma_h / sqrt(pi)",
      "closed form");
  add("markov2.abs_diff_limit.quadrature",
      gaussian_abs_diff_quadrature(std::sqrt(spec.sigma_h2_spectral)), "E|G - G'|",
      "trapezoid");
  add("sqrt2", sqrt2, "sqrt 2", "closed form");
  return rows;
}

}  // namespace joinlab
