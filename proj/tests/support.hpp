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

// Test-side oracles and generators. Nothing here calls the code under test
// except to construct inputs.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "joinlab/kernelspace.hpp"

namespace joinlab::testing {

// Minimum over all permutations of sum cost[i][sigma(i)].
inline double brute_force_assignment(const std::vector<double>& cost, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + perm[i]];
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Generic space: real marks and kernels, exact masses from integer weights.
inline FiniteKernelSpace random_space(std::size_t atoms, std::size_t marks, std::size_t colors,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::uniform_int_distribution<int> weight(1, 6);
  FiniteKernelSpace s;
  for (std::size_t a = 0; a < marks; ++a) s.mark_names.push_back("m" + std::to_string(a));
  for (std::size_t c = 0; c < colors; ++c) s.color_names.push_back("k" + std::to_string(c));
  std::vector<int> w(atoms);
  int total = 0;
  for (auto& x : w) total += (x = weight(rng));
  s.exact_masses.emplace();
  for (auto x : w) {
    s.exact_masses->push_back(Rational(x, total));
    s.masses.push_back(static_cast<double>(x) / total);
  }
  s.marks.assign(atoms, {});
  for (auto& row : s.marks)
    for (std::size_t a = 0; a < marks; ++a) row.push_back(value(rng));
  for (std::size_t c = 0; c < colors; ++c) {
    std::vector<double> k(atoms * atoms);
    for (auto& x : k) x = value(rng);
    s.kernels.push_back(std::move(k));
  }
  return s;
}

// Splits atom z into two twins; the copy gets `share` of its mass.
inline FiniteKernelSpace plant_twin(const FiniteKernelSpace& s, std::size_t z, Rational share) {
  const std::size_t n = s.size();
  FiniteKernelSpace out = s;
  const Rational moved = (*s.exact_masses)[z] * share;
  (*out.exact_masses)[z] -= moved;
  out.exact_masses->push_back(moved);
  out.masses.clear();
  for (const auto& m : *out.exact_masses) out.masses.push_back(to_double(m));
  out.marks.push_back(s.marks[z]);
  for (std::size_t c = 0; c < s.kernels.size(); ++c) {
    std::vector<double> k((n + 1) * (n + 1));
    auto src = [&](std::size_t i) { return i == n ? z : i; };
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) k[i * (n + 1) + j] = s.kernel(c, src(i), src(j));
    out.kernels[c] = std::move(k);
  }
  return out;
}

// Atom i of s becomes atom perm[i] of the result.
inline FiniteKernelSpace relabel(const FiniteKernelSpace& s, const std::vector<std::size_t>& perm) {
  const std::size_t n = s.size();
  FiniteKernelSpace out = s;
  for (std::size_t i = 0; i < n; ++i) {
    out.masses[perm[i]] = s.masses[i];
    if (s.exact_masses) (*out.exact_masses)[perm[i]] = (*s.exact_masses)[i];
    out.marks[perm[i]] = s.marks[i];
  }
  for (std::size_t c = 0; c < s.kernels.size(); ++c)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out.kernels[c][perm[i] * n + perm[j]] = s.kernel(c, i, j);
  return out;
}

}  // namespace joinlab::testing
