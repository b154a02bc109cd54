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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "joinlab/arrays.hpp"
#include "json.hpp"

namespace joinlab {

enum class GapMethod { quantile_1d, assignment_exact, kr_dual };
std::string to_string(GapMethod method);

// A Wasserstein estimate or a Kantorovich-Rubinstein certificate.
// kr_dual values lower-bound W1 of the laws the test function acts on;
// dividing by lipschitz_chain transfers the bound to the unprojected laws.
struct GapEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  GapMethod method = GapMethod::kr_dual;
  std::string observable;
  double lipschitz_chain = 1.0;
};

struct DepEstimate {
  ArraySpec spec;
  double p = 1.0;
  std::vector<std::string> family;
  // Maximum of per_joining values: a lower bound for Dep restricted to the
  // supplied family (plug-in W_p, biased upward at finite N).
  double value = 0.0;
  std::vector<GapEstimate> per_joining;
};

nlohmann::json to_json(const GapEstimate& gap);
nlohmann::json to_json(const DepEstimate& dep);

inline constexpr std::size_t kDefaultAssignmentCap = 4096;

// Exact W1 between two equal-size empirical measures on the line.
GapEstimate w1_1d(std::vector<double> a, std::vector<double> b);

struct Assignment {
  std::vector<std::size_t> row_to_col;
  double cost = 0.0;
};
// Minimum-cost perfect matching for a dense n x n row-major cost matrix
// (shortest augmenting paths with dual potentials, O(n^3)).
Assignment solve_assignment(std::span<const double> cost, std::size_t n);

// ((1/N) min_sigma sum ||a_i - b_sigma(i)||_2^p)^(1/p) over rows of width dim.
GapEstimate wp_assignment(std::span<const double> a, std::span<const double> b,
                          std::size_t dim, double p,
                          std::size_t cap = kDefaultAssignmentCap);
GapEstimate wp_assignment(const ProjectedLaw& a, const ProjectedLaw& b, double p,
                          std::size_t cap = kDefaultAssignmentCap);
GapEstimate wp_assignment(const EmpiricalLaw& a, const EmpiricalLaw& b, double p,
                          std::size_t cap = kDefaultAssignmentCap);

// |E f(A) - E f(B)| / Lip(f) on projected laws, CLT standard error.
GapEstimate kr_gap(const ProjectedLaw& a, const ProjectedLaw& b, const TestFunction& f);
// Scalar projected laws; normalized by the recorded Lipschitz chain, so the
// value lower-bounds W1 of the full array laws.
GapEstimate kr_gap(const ProjectedLaw& a, const ProjectedLaw& b);
// Scalar observable on full laws, normalized by its Lipschitz constant.
GapEstimate kr_gap(const EmpiricalLaw& a, const EmpiricalLaw& b, const Observable& obs);

struct CertificateSearch {
  GapEstimate best;
  std::vector<GapEstimate> candidates;
};
// Evaluates every compatible scalar observable of the catalogue.
CertificateSearch certificate_search(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                     const std::vector<Observable>& catalogue);

// Max over the family of W_p(law(lambda), law(product)). All laws share the
// seed (common random numbers), so a product member contributes exactly 0.
DepEstimate dep_lower_bound(const std::vector<JoiningHandle>& family,
                            const ArraySpec& spec, double p, std::size_t N,
                            std::uint64_t seed,
                            std::size_t cap = kDefaultAssignmentCap);

}  // namespace joinlab
