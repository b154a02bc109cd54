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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "joinlab/analytics.hpp"
#include "joinlab/errors.hpp"
#include "joinlab/transport.hpp"
#include "support.hpp"

namespace joinlab {
namespace {

std::vector<double> random_points(std::size_t n, std::size_t dim, std::mt19937_64& rng,
                                  double shift = 0.0) {
  std::normal_distribution<double> g(shift, 1.0);
  std::vector<double> v(n * dim);
  for (auto& x : v) x = g(rng);
  return v;
}

double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

TEST(Transport, OneDimensionalExamples) {
  EXPECT_EQ(w1_1d({0.3, 0.1}, {0.1, 0.3}).value, 0.0);
  EXPECT_EQ(w1_1d({0.0, 0.0}, {1.0, 1.0}).value, 1.0);
  EXPECT_EQ(w1_1d({0.0, 1.0}, {0.5, 0.5}).value, 0.5);
  EXPECT_THROW(w1_1d({0.0}, {0.0, 1.0}), InvalidArgument);
}

TEST(Transport, AssignmentMatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 8;
    std::vector<double> cost(n * n);
    for (auto& c : cost) c = trial % 3 == 0 ? std::round(u(rng)) : u(rng);
    const auto a = solve_assignment(cost, n);
    double total = 0.0;
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_FALSE(used[a.row_to_col[i]]);
      used[a.row_to_col[i]] = true;
      total += cost[i * n + a.row_to_col[i]];
    }
    EXPECT_NEAR(total, a.cost, 1e-9);
    EXPECT_NEAR(a.cost, testing::brute_force_assignment(cost, n), 1e-12);
  }
}

TEST(Transport, PlanarThreePointInstance) {
  const std::vector<double> a{0, 0, 1, 0, 0, 1};
  const std::vector<double> b{1, 1, 0, 0, 2, 0};
  std::vector<double> cost(9);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      cost[i * 3 + j] = euclid({a.data() + 2 * i, 2}, {b.data() + 2 * j, 2});
  EXPECT_NEAR(wp_assignment(a, b, 2, 1.0).value, testing::brute_force_assignment(cost, 3) / 3.0,
              1e-12);
}

TEST(Transport, AssignmentAgreesWithQuantileCouplingInOneDimension) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_points(60, 1, rng), b = random_points(60, 1, rng, 0.4);
    EXPECT_NEAR(wp_assignment(a, b, 1, 1.0).value, w1_1d(a, b).value, 1e-12);
  }
}

TEST(Transport, PermutedSamplesHaveZeroDistance) {
  std::mt19937_64 rng(3);
  const auto a = random_points(40, 3, rng);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> b(a.size());
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t d = 0; d < 3; ++d) b[perm[i] * 3 + d] = a[i * 3 + d];
  EXPECT_NEAR(wp_assignment(a, b, 3, 1.0).value, 0.0, 1e-12);
  EXPECT_NEAR(wp_assignment(a, b, 3, 2.0).value, 0.0, 1e-12);
}

TEST(Transport, TriangleInequalityAndOrderMonotonicity) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_points(30, 2, rng), b = random_points(30, 2, rng, 0.5),
               c = random_points(30, 2, rng, -0.3);
    for (double p : {1.0, 2.0}) {
      const double ab = wp_assignment(a, b, 2, p).value, bc = wp_assignment(b, c, 2, p).value,
                   ac = wp_assignment(a, c, 2, p).value;
      EXPECT_LE(ac, ab + bc + 1e-9);
    }
    EXPECT_GE(wp_assignment(a, b, 2, 2.0).value, wp_assignment(a, b, 2, 1.0).value - 1e-12);
  }
}

TEST(Transport, AssignmentPreconditions) {
  std::vector<double> a(10), b(12);
  EXPECT_THROW(wp_assignment(a, b, 2, 1.0), InvalidArgument);
  std::vector<double> big(20);
  EXPECT_THROW(wp_assignment(big, big, 1, 1.0, 10), CapExceeded);
  EXPECT_THROW(wp_assignment(big, big, 1, 0.5), InvalidArgument);
}

// KR certificates on the same samples never exceed the empirical W1.
TEST(Transport, KrGapIsBoundedByAssignment) {
  const auto b = bernoulli_shift(12);
  const ArraySpec spec{2, 2, 1};
  const auto la = empirical_law(*diagonal_joining(b), spec, 300, 1);
  const auto lb = empirical_law(*product_joining(b, b), spec, 300, 2);
  const auto w = wp_assignment(la, lb, 1.0);
  for (const auto& obs : test_functions(0.75)) {
    const auto g = kr_gap(la, lb, obs);
    EXPECT_LE(g.value, w.value + 1e-12) << obs.name;
  }
  const auto pa = project(la, obs_pair00()), pb = project(lb, obs_pair00());
  const auto wp = wp_assignment(pa, pb, 1.0);
  EXPECT_LE(kr_gap(pa, pb, psi_bernoulli()).value, wp.value + 1e-12);
  EXPECT_LE(kr_gap(pa, pb, phi_abs()).value, wp.value + 1e-12);
}

TEST(Transport, LipschitzContractionOfProjections) {
  const auto mk = markov_shift({{0.7, 0.3}, {0.3, 0.7}}, 0.5, 0.5, 8);
  const ArraySpec spec{2, 6, 1};
  const auto la = empirical_law(*diagonal_joining(mk), spec, 150, 3);
  const auto lb = empirical_law(*product_joining(mk, mk), spec, 150, 4);
  const double full = wp_assignment(la, lb, 1.0).value;
  for (const auto& obs : {obs_pair00(), obs_anchor_pair(), obs_avg_distance(6), obs_mismatch(6, 0.5)}) {
    const double projected = wp_assignment(project(la, obs), project(lb, obs), 1.0).value;
    EXPECT_LE(projected, obs.lipschitz * full + 1e-12) << obs.name;
  }
}

TEST(Transport, KrGapRejectsUnnormalizedTests) {
  ProjectedLaw a{"x", 2, {0.0, 0.0, 1.0, 1.0}, 1.0, {}};
  TestFunction bad{"bad", 2, 0.0, [](std::span<const double>) { return 0.0; }};
  EXPECT_THROW(kr_gap(a, a, bad), InvalidArgument);
  bad.lipschitz = std::numeric_limits<double>::infinity();
  EXPECT_THROW(kr_gap(a, a, bad), InvalidArgument);
}

TEST(Transport, IdenticalLawsGiveNoCertificate) {
  const auto c = circle_rotation();
  const ArraySpec spec{2, 1, 1};
  const auto la = empirical_law(*product_joining(c, c), spec, 4000, 1);
  const auto lb = empirical_law(*product_joining(c, c), spec, 4000, 2);
  const auto search = certificate_search(la, lb, test_functions(0.5));
  for (const auto& cand : search.candidates) {
    EXPECT_LE(cand.value, 4.0 * cand.standard_error) << cand.observable;
  }
}

// Evaluates the three named Bernoulli certificates; the search must return
// the largest, which is the absolute-difference test on the pair entries.
TEST(Transport, CertificateSearchPicksTheLargestGap) {
  const auto b = bernoulli_shift(24);
  const ArraySpec spec{2, 1, 1};
  const auto la = empirical_law(*diagonal_joining(b), spec, 20000, 5);
  const auto lb = empirical_law(*product_joining(b, b), spec, 20000, 6);
  const std::vector<Observable> catalogue{compose(psi_bernoulli(), obs_pair00()),
                                          compose(phi_abs(), obs_pair00()),
                                          compose(phi_abs(), obs_anchor_pair())};
  const auto search = certificate_search(la, lb, catalogue);
  ASSERT_EQ(search.candidates.size(), 3U);
  double best = 0.0;
  for (const auto& c : search.candidates) best = std::max(best, c.value);
  EXPECT_EQ(search.best.value, best);
  EXPECT_NEAR(search.candidates[0].value, bernoulli_certificate_value(),
              4.0 * search.candidates[0].standard_error + 1e-12);
  EXPECT_EQ(search.best.observable, "phi_abs[pair00]");
}

TEST(Transport, DepLowerBound) {
  const auto b = bernoulli_shift(8);
  const ArraySpec spec{2, 2, 0};
  const auto zero = dep_lower_bound({product_joining(b, b)}, spec, 1.0, 200, 1);
  EXPECT_EQ(zero.value, 0.0);
  const auto dep = dep_lower_bound({product_joining(b, b), diagonal_joining(b)}, spec, 1.0, 200, 1);
  ASSERT_EQ(dep.per_joining.size(), 2U);
  EXPECT_EQ(dep.value, std::max(dep.per_joining[0].value, dep.per_joining[1].value));
  EXPECT_GT(dep.value, 4.0 * dep.per_joining[1].standard_error);
  EXPECT_THROW(dep_lower_bound({}, spec, 1.0, 10, 1), InvalidArgument);
  const auto json = to_json(dep);
  EXPECT_EQ(json.at("per_joining").size(), 2U);
}

}  // namespace
}  // namespace joinlab
