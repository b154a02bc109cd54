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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "joinlab/joinings.hpp"
#include "joinlab/rational.hpp"
#include "json.hpp"

namespace joinlab {

// Finite marked colored kernel space. Kernels are stored per color as
// row-major size() x size() matrices.
struct FiniteKernelSpace {
  std::vector<std::string> mark_names;
  std::vector<std::string> color_names;
  std::vector<double> masses;
  // Present when every mass is an exact fraction.
  std::optional<std::vector<Rational>> exact_masses;
  std::vector<std::vector<double>> marks;    // [atom][mark]
  std::vector<std::vector<double>> kernels;  // [color][row * size() + col]

  std::size_t size() const { return masses.size(); }
  bool exact() const { return exact_masses.has_value(); }
  double kernel(std::size_t color, std::size_t row, std::size_t col) const {
    return kernels[color][row * size() + col];
  }
  // Throws InvalidArgument on shape or mass violations.
  void validate() const;
  // Default twin tolerance: 0 for exact masses, 1e-9 otherwise.
  double default_tolerance() const { return exact() ? 0.0 : 1e-9; }
};

struct TwinPartition {
  std::vector<std::vector<std::size_t>> blocks;  // sorted, ordered by first member
  double tolerance = 0.0;
};

// Blocks are the connected components of the pairwise twin relation, so the
// result is monotone in tol.
TwinPartition twin_partition(const FiniteKernelSpace& space, double tol);
// Representatives are the smallest index in each block. Throws
// ToleranceInconsistency when block members disagree beyond tol.
FiniteKernelSpace twin_quotient(const FiniteKernelSpace& space, double tol);
FiniteKernelSpace twin_quotient(const FiniteKernelSpace& space, const TwinPartition& partition);

// Joint law of (marks of Z_i)_i followed by (kernels of (Z_i, Z_j))_{i != j}
// for i.i.d. atoms Z_1..Z_n. Keys are ordered mark-major then color-major.
struct KernelArrayLaw {
  std::size_t n = 0;
  std::map<std::vector<double>, double> atoms;
  std::optional<std::map<std::vector<double>, Rational>> exact_atoms;
};

struct ArrayLawSelection {
  std::optional<std::vector<std::size_t>> marks;   // all when empty
  std::optional<std::vector<std::size_t>> colors;  // all when empty
};

KernelArrayLaw exact_array_law(const FiniteKernelSpace& space, std::size_t n,
                               const ArrayLawSelection& selection = {},
                               std::size_t cap = 1'000'000);
// Atoms are compared in key order; keys within key_tol, masses exact when both
// laws are exact and within mass_tol otherwise.
bool laws_equal(const KernelArrayLaw& a, const KernelArrayLaw& b, double key_tol = 0.0,
                double mass_tol = 1e-12);

struct IsomorphismVerdict {
  bool isomorphic = false;
  std::vector<std::size_t> witness;  // atom i of the first space -> witness[i]
  std::string reason;
};

// Exhaustive search over mass-preserving bijections; marks and colors are
// matched by name.
IsomorphismVerdict kernel_isomorphic(const FiniteKernelSpace& a, const FiniteKernelSpace& b,
                                     double tol, std::size_t cap = 10);

// Atoms are the support points of the joining. For 0 <= a, b <= cutoff the
// marks are MX[a,b], MY[a,b] and the colors are KX[a,b], KY[a,b].
FiniteKernelSpace joining_to_kernel_space(const Joining& joining, std::size_t cutoff);

nlohmann::json to_json(const FiniteKernelSpace& space);
FiniteKernelSpace kernel_space_from_json(const nlohmann::json& doc);
FiniteKernelSpace read_kernel_space(const std::string& path);
void write_kernel_space(const FiniteKernelSpace& space, const std::string& path);

}  // namespace joinlab
