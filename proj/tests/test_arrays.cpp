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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "joinlab/analytics.hpp"
#include "joinlab/arrays.hpp"
#include "joinlab/errors.hpp"
#include "joinlab/parallel.hpp"

namespace joinlab {
namespace {

const Matrix kTwoState{{0.7, 0.3}, {0.3, 0.7}};

std::vector<JoiningHandle> sample_joinings() {
  const auto c = circle_rotation();
  const auto b = bernoulli_shift(6);
  const auto mk = markov_shift(kTwoState, 0.5, 0.5, 10);
  const auto z = cyclic_rotation(6, 1);
  return {product_joining(c, c),    diagonal_joining(b),         graph_joining_rotation(c, 0.2),
          product_joining(mk, mk),  diagonal_joining(mk),        product_joining(doubling_map(), c),
          graph_joining_rotation(z, 2), relindep_joining(cyclic_rotation(2, 1), c, c)};
}

TEST(Arrays, SymmetryZeroDiagonalAndRange) {
  const ArraySpec spec{3, 4, 2};
  for (const auto& j : sample_joinings()) {
    Stream stream(1);
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = sample_array(*j, spec, stream);
      const double dx_max = j->left()->diameter_bound() + 1e-12;
      const double dy_max = j->right()->diameter_bound() + 1e-12;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k < 3; ++k)
          for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
              EXPECT_EQ(s.dx(i, k, a, b), s.dx(k, i, b, a));
              EXPECT_EQ(s.dy(i, k, a, b), s.dy(k, i, b, a));
              EXPECT_GE(s.dx(i, k, a, b), 0.0);
              EXPECT_LE(s.dx(i, k, a, b), dx_max);
              EXPECT_LE(s.dy(i, k, a, b), dy_max);
            }
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t a = 0; a < 4; ++a) {
          EXPECT_EQ(s.dx(i, i, a, a), 0.0);
          EXPECT_EQ(s.dy(i, i, a, a), 0.0);
          for (std::size_t r = 0; r < 2; ++r) {
            EXPECT_LE(s.ax(i, a, r), dx_max);
            EXPECT_LE(s.ay(i, a, r), dy_max);
          }
        }
    }
  }
}

TEST(Arrays, LazyArrayMatchesMaterialized) {
  const ArraySpec spec{2, 5, 3};
  for (const auto& j : sample_joinings()) {
    Stream s1(4), s2(4);
    const auto anchors = make_anchors(*j, spec.R);
    const auto lazy = sample_orbit_array(*j, spec, s1, &anchors);
    const auto full = sample_array(*j, spec, s2);
    const auto mat = lazy.materialize();
    ASSERT_EQ(mat.values().size(), full.values().size());
    for (std::size_t k = 0; k < full.values().size(); ++k) {
      EXPECT_EQ(mat.values()[k], full.values()[k]) << j->id();
    }
    std::vector<double> st(5);
    lazy.same_time(Side::x, 0, 1, st);
    for (std::size_t t = 0; t < 5; ++t) EXPECT_NEAR(st[t], full.dx(0, 1, t, t), 1e-12);
  }
}

TEST(Arrays, DiagonalBernoulliHasEqualBlocks) {
  const ArraySpec spec{2, 3, 2};
  Stream stream(6);
  const auto s = sample_array(*diagonal_joining(bernoulli_shift(5)), spec, stream);
  const std::size_t half = spec.distance_block();
  for (std::size_t k = 0; k < half; ++k) EXPECT_EQ(s.values()[k], s.values()[half + k]);
}

TEST(Arrays, RotationSingleOrbitFormula) {
  const double alpha = 0.137;
  const auto c = circle_rotation(alpha);
  Stream stream(7);
  const ArraySpec spec{2, 6, 0};
  const auto s = sample_array(*product_joining(c, c), spec, stream);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) {
      double u = (static_cast<double>(b) - static_cast<double>(a)) * alpha;
      u -= std::floor(u);
      EXPECT_NEAR(s.dx(1, 1, a, b), std::min(u, 1.0 - u), 1e-12);
    }
}

TEST(Arrays, EmpiricalLawFirstSampleUsesFirstSplit) {
  const auto j = product_joining(bernoulli_shift(4), circle_rotation());
  const ArraySpec spec{2, 2, 1};
  const auto law = empirical_law(*j, spec, 1, 99);
  Stream stream = Stream(99).split(0);
  const auto s = sample_array(*j, spec, stream);
  for (std::size_t k = 0; k < spec.size(); ++k) EXPECT_EQ(law.row(0)[k], s.values()[k]);
}

TEST(Arrays, EmpiricalLawIsDeterministic) {
  const auto j = product_joining(markov_shift(kTwoState, 0.5, 0.5, 8), doubling_map());
  const ArraySpec spec{2, 3, 1};
  const auto a = empirical_law(*j, spec, 200, 5);
  const auto b = empirical_law(*j, spec, 200, 5);
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t k = 0; k < a.values().size(); ++k) EXPECT_EQ(a.values()[k], b.values()[k]);
}

TEST(Arrays, ParallelForIsIndependentOfWorkers) {
  std::vector<std::uint64_t> one(1000), four(1000);
  parallel_for(1000, [&](std::size_t k) { one[k] = Stream(3).split(k)(); }, 1);
  parallel_for(1000, [&](std::size_t k) { four[k] = Stream(3).split(k)(); }, 4);
  EXPECT_EQ(one, four);
}

TEST(Arrays, CsvRoundTripIsExact) {
  const auto j = product_joining(bernoulli_shift(4), circle_rotation());
  const ArraySpec spec{2, 2, 1};
  const auto law = empirical_law(*j, spec, 25, 12);
  std::stringstream buf;
  write_csv(law, buf);
  const auto back = read_csv(buf);
  EXPECT_EQ(back.spec(), spec);
  EXPECT_EQ(back.provenance().seed, 12U);
  EXPECT_EQ(back.provenance().joining, law.provenance().joining);
  EXPECT_EQ(back.provenance().tail_bound_x, law.provenance().tail_bound_x);
  ASSERT_EQ(back.values().size(), law.values().size());
  for (std::size_t k = 0; k < law.values().size(); ++k) EXPECT_EQ(back.values()[k], law.values()[k]);
}

TEST(Arrays, CsvRejectsMalformedInput) {
  std::stringstream bad("not a law\n1,2,3\n");
  EXPECT_THROW(read_csv(bad), InvalidArgument);
}

TEST(Arrays, ProjectedLawMatchesProjectOfEmpiricalLaw) {
  const auto mk = markov_shift(kTwoState, 0.5, 0.5, 10);
  const auto j = product_joining(mk, mk);
  const ArraySpec spec{2, 6, 1};
  const auto law = empirical_law(*j, spec, 300, 8);
  for (const auto& obs : {obs_pair00(), obs_anchor_pair(), obs_avg_distance(6), obs_mismatch(6, 0.5)}) {
    const auto a = project(law, obs);
    const auto b = projected_law(*j, spec, obs, 300, 8);
    ASSERT_EQ(a.values.size(), b.values.size());
    for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_EQ(a.values[k], b.values[k]) << obs.name;
    EXPECT_EQ(a.lipschitz_chain, obs.lipschitz);
  }
}

// Difference quotients of every observable on random arrays never exceed the
// declared Lipschitz constant.
TEST(Arrays, DeclaredLipschitzConstantsHold) {
  const ArraySpec spec{2, 8, 1};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> value(0.0, 1.4);
  std::vector<Observable> catalogue{obs_pair00(), obs_anchor_pair(), obs_avg_distance(8),
                                    obs_mismatch(8, 0.4), obs_identity(spec)};
  for (const auto& o : test_functions(1.4)) catalogue.push_back(o);
  catalogue.push_back(compose(psi_bernoulli(), obs_pair00()));
  for (const auto& obs : catalogue) {
    double worst = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
      std::vector<double> u(spec.size()), v(spec.size());
      for (auto& x : u) x = value(rng);
      const double scale = trial % 2 ? 1.0 : 1e-3;
      for (std::size_t k = 0; k < u.size(); ++k) v[k] = std::clamp(u[k] + scale * (value(rng) - 0.7), 0.0, 1.4);
      if (obs.name.find("psi_bernoulli") != std::string::npos) {
        for (auto* w : {&u, &v})
          for (auto& x : *w) x = std::min(x, 0.75);
      }
      ArraySample su(spec, u), sv(spec, v);
      std::vector<double> fu(obs.dim), fv(obs.dim);
      obs.eval(su, fu);
      obs.eval(sv, fv);
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < obs.dim; ++k) num += (fu[k] - fv[k]) * (fu[k] - fv[k]);
      for (std::size_t k = 0; k < u.size(); ++k) den += (u[k] - v[k]) * (u[k] - v[k]);
      if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
    }
    EXPECT_LE(worst, obs.lipschitz * 1.0001) << obs.name;
  }
}

TEST(Arrays, ObservableShapesAndEdgeCases) {
  EXPECT_EQ(obs_avg_distance(1).lipschitz, 1.0);
  EXPECT_NEAR(obs_avg_distance(16).lipschitz, 0.25, 1e-15);
  EXPECT_NEAR(obs_mismatch(16, 0.5).lipschitz, 0.5, 1e-15);
  EXPECT_THROW(obs_mismatch(4, 1.0), InvalidArgument);
  const auto law = empirical_law(*diagonal_joining(circle_rotation()), ArraySpec{1, 1, 0}, 3, 1);
  EXPECT_THROW(project(law, obs_pair00()), InvalidArgument);
  EXPECT_THROW(ArraySpec({0, 1, 0}).validate(), InvalidArgument);
}

TEST(Arrays, AvgDistanceReducesToPair00AtOrbitLengthOne) {
  const auto law = empirical_law(*product_joining(doubling_map(), doubling_map()), ArraySpec{2, 1, 0}, 50, 2);
  const auto a = project(law, obs_avg_distance(1));
  const auto b = project(law, obs_pair00());
  EXPECT_EQ(a.values, b.values);
}

TEST(Arrays, MismatchIsZeroOnDiagonalAndInUnitInterval) {
  const auto mk = markov_shift(kTwoState, 0.5, 0.5, 12);
  const auto d = projected_law(*diagonal_joining(mk), ArraySpec{2, 32, 0}, obs_mismatch(32, 0.5), 200, 3);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_EQ(d.row(k)[0], d.row(k)[1]);
  const auto p = projected_law(*product_joining(mk, mk), ArraySpec{2, 32, 0}, obs_mismatch(32, 0.5), 200, 3);
  for (double v : p.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(v * 32.0, std::round(v * 32.0), 1e-9);
  }
}

TEST(Arrays, BernoulliProductPairDistanceMean) {
  const auto b = bernoulli_shift(24);
  const auto law = projected_law(*product_joining(b, b), ArraySpec{2, 1, 0}, obs_pair00(), 50000, 4);
  const auto col = law.column(0);
  double mean = 0.0, sq = 0.0;
  for (double v : col) mean += v;
  mean /= col.size();
  for (double v : col) sq += (v - mean) * (v - mean);
  const double se = std::sqrt(sq / (col.size() - 1) / col.size());
  // E R = (1/2) sum_k 2^{-|k|-2} = 3/8.
  EXPECT_NEAR(mean, 0.375, 4.0 * se);
}

TEST(Arrays, AnchoredBernoulliLowOrder) {
  const auto b = bernoulli_shift(24);
  const ArraySpec spec{1, 1, 1};
  const auto diag = projected_law(*diagonal_joining(b), spec, obs_anchor_pair(), 20000, 5);
  for (std::size_t k = 0; k < diag.size(); ++k) EXPECT_EQ(diag.row(k)[0], diag.row(k)[1]);
  const auto prod = projected_law(*product_joining(b, b), spec, obs_anchor_pair(), 40000, 6);
  double mean = 0.0, sq = 0.0;
  std::vector<double> v(prod.size());
  for (std::size_t k = 0; k < prod.size(); ++k) {
    v[k] = std::pow(prod.row(k)[0] - prod.row(k)[1], 2);
    mean += v[k];
  }
  mean /= v.size();
  for (double x : v) sq += (x - mean) * (x - mean);
  const double se = std::sqrt(sq / (v.size() - 1) / v.size());
  EXPECT_NEAR(mean, 5.0 / 96.0, 4.0 * se + 1e-12);
}

// Chi-square test of independence of binned (dX, dY) under the product
// joining; 3x3 bins, 4 degrees of freedom, critical value at 1e-4.
TEST(Arrays, ProductJoiningBlocksAreIndependent) {
  const auto c = circle_rotation();
  const auto law = projected_law(*product_joining(c, c), ArraySpec{2, 1, 0}, obs_pair00(), 30000, 7);
  double table[3][3] = {};
  for (std::size_t k = 0; k < law.size(); ++k) {
    const int i = std::min(2, static_cast<int>(law.row(k)[0] * 6.0));
    const int j = std::min(2, static_cast<int>(law.row(k)[1] * 6.0));
    table[i][j] += 1.0;
  }
  double rows[3] = {}, cols[3] = {}, n = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      rows[i] += table[i][j];
      cols[j] += table[i][j];
      n += table[i][j];
    }
  double chi2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double e = rows[i] * cols[j] / n;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  EXPECT_LT(chi2, 23.51);
}

// Exact cyclic laws agree with Monte Carlo means within 4 SE.
TEST(Arrays, ExactCyclicLawMatchesMonteCarlo) {
  const auto z = cyclic_rotation(5, 2);
  for (const auto& j : {product_joining(z, z), graph_joining_rotation(z, 1)}) {
    const ArraySpec spec{2, 2, 1};
    const auto exact = cyclic_exact_law(*j, spec);
    const std::size_t probe = spec.dx_index(0, 1, 0, 1);
    const std::size_t probe2 = spec.ay_index(1, 1, 0);
    const auto expect = to_double(exact_expectation(exact, [&](const std::vector<Rational>& key) {
      return key[probe] * key[probe2];
    }));
    const auto law = empirical_law(*j, spec, 40000, 9);
    double mean = 0.0, sq = 0.0;
    std::vector<double> v(law.size());
    for (std::size_t k = 0; k < law.size(); ++k) {
      v[k] = law.row(k)[probe] * law.row(k)[probe2];
      mean += v[k];
    }
    mean /= v.size();
    for (double x : v) sq += (x - mean) * (x - mean);
    const double se = std::sqrt(sq / (v.size() - 1) / v.size());
    EXPECT_NEAR(mean, expect, 4.0 * se) << j->id();
  }
}

TEST(Arrays, MemoryBudgetFailsFast) {
  const auto c = circle_rotation();
  EXPECT_THROW(empirical_law(*product_joining(c, c), ArraySpec{4, 64, 0}, 1000, 1, 1 << 20),
               CapExceeded);
}

}  // namespace
}  // namespace joinlab
