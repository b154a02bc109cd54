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

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "joinlab/arrays.hpp"
#include "joinlab/rational.hpp"
#include "json.hpp"

namespace joinlab {

// Sum over |k| <= K (all k when K is empty) of 2^{-2|k|-4}.
double bernoulli_weight_square_sum(std::optional<int> K = std::nullopt);
// Var d(X1, X2) for independent fair-coin configurations; 5/192 untruncated.
double bernoulli_var_R(std::optional<int> K = std::nullopt);
// E d(X1, X2) = (1/2) sum of weights; 3/8 untruncated.
double bernoulli_mean_R(std::optional<int> K = std::nullopt);
// Product-law integral of psi_bernoulli = (2/(3 sqrt2)) * 2 Var(R).
double bernoulli_certificate_value(std::optional<int> K = std::nullopt);
// Gradient bound of (r-s)^2 on [0,3/4]^2: 3 sqrt2 / 2.
double bernoulli_lipschitz_normalization();

double doubling_var_Am(std::size_t m);

struct RateBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// (1/(24 sqrt2 m), 1/sqrt(24 m)).
RateBounds doubling_rate_bounds(std::size_t m);

// Composite trapezoid rule for integrals over the circle with f(u) = d(u,0).
double circle_moment_quadrature(int power, std::size_t points = std::size_t{1} << 20);
// Cov(f(2^s U), f(2^t U)) for U uniform on the circle.
double doubling_covariance_quadrature(int s, int t,
                                      std::size_t points = std::size_t{1} << 20);
// E|G - G'| for independent N(0, sigma^2), by quadrature.
double gaussian_abs_diff_quadrature(double sigma, std::size_t points = 1 << 16);

struct MarkovSpectrum {
  Matrix transition;
  std::vector<double> stationary;
  // Largest |eigenvalue| of P other than 1.
  double theta = 0.0;
  double v_h = 0.0;
  double sigma_h2_series = 0.0;
  double sigma_h2_spectral = 0.0;
  std::size_t series_terms = 0;
};

// h defaults to the mismatch indicator 1{i != j}. The series route sums
// autocovariances of h under P (x) P; the spectral route diagonalizes the
// symmetrized P (x) P. Degenerate eigenvalues are handled by summing over an
// orthonormal eigenbasis.
MarkovSpectrum markov_spectrum(const Matrix& transition,
                               std::optional<Matrix> h = std::nullopt);

struct MarkovRateBounds {
  // sqrt(2 v_h (1+theta) / (m (1-theta))).
  double upper = 0.0;
  // sqrt2 sigma_h / sqrt(pi): liminf of sqrt(m) W1.
  double asymptotic_lower_scaled = 0.0;
  // sigma_h / sqrt(2 pi m).
  double eventual_lower = 0.0;
};
MarkovRateBounds markov_rate_bounds(const MarkovSpectrum& spectrum, std::size_t m);
// Limit of sqrt(m) E|B_m - B'_m| = 2 sigma_h / sqrt(pi).
double markov_abs_diff_limit(const MarkovSpectrum& spectrum);

// Exact law of the (anchored) array for a finitely supported joining.
struct ExactArrayLaw {
  ArraySpec spec;
  std::map<std::vector<Rational>, Rational> atoms;

  bool operator==(const ExactArrayLaw&) const = default;
};

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

ExactArrayLaw cyclic_exact_law(const Joining& joining, const ArraySpec& spec,
                               std::size_t cap = kDefaultEnumerationCap);
Rational exact_expectation(const ExactArrayLaw& law,
                           const std::function<Rational(const std::vector<Rational>&)>& f);

// Closed-form and quadrature constants, one JSON record per constant.
nlohmann::json constants_table();

}  // namespace joinlab
