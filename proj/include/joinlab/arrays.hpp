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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "joinlab/joinings.hpp"

namespace joinlab {

// Orders of a (possibly anchored) distance array: n particles, orbit length
// m, R anchors per coordinate (R = 0 is unanchored).
struct ArraySpec {
  std::size_t n = 1;
  std::size_t m = 1;
  std::size_t R = 0;

  void validate() const;

  std::size_t distance_block() const { return n * n * m * m; }
  std::size_t anchor_block() const { return n * m * R; }
  // Flattened length: dX, dY, aX, aY in that order, each row-major.
  std::size_t size() const { return 2 * (distance_block() + anchor_block()); }

  std::size_t dx_index(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
    return ((i * n + j) * m + a) * m + b;
  }
  std::size_t dy_index(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
    return distance_block() + dx_index(i, j, a, b);
  }
  std::size_t ax_index(std::size_t i, std::size_t a, std::size_t r) const {
    return 2 * distance_block() + (i * m + a) * R + r;
  }
  std::size_t ay_index(std::size_t i, std::size_t a, std::size_t r) const {
    return ax_index(i, a, r) + anchor_block();
  }
  // Column names in flattened order, e.g. "dX[0,1,0,0]".
  std::vector<std::string> column_names() const;

  bool operator==(const ArraySpec&) const = default;
};

enum class Side { x, y };

// Read access to one sampled array. Indices are 0-based.
class ArrayAccess {
 public:
  virtual ~ArrayAccess() = default;
  virtual const ArraySpec& spec() const = 0;
  virtual double dx(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const = 0;
  virtual double dy(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const = 0;
  virtual double ax(std::size_t i, std::size_t a, std::size_t r) const = 0;
  virtual double ay(std::size_t i, std::size_t a, std::size_t r) const = 0;
  // out[t] = d(T^t x_i, T^t x_j), t < m, on the chosen coordinate.
  virtual void same_time(Side side, std::size_t i, std::size_t j,
                         std::span<double> out) const;
};

// Materialized flattened array.
class ArraySample final : public ArrayAccess {
 public:
  ArraySample(ArraySpec spec, std::vector<double> values);

  const ArraySpec& spec() const override { return spec_; }
  std::span<const double> values() const { return values_; }
  double dx(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const override {
    return values_[spec_.dx_index(i, j, a, b)];
  }
  double dy(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const override {
    return values_[spec_.dy_index(i, j, a, b)];
  }
  double ax(std::size_t i, std::size_t a, std::size_t r) const override {
    return values_[spec_.ax_index(i, a, r)];
  }
  double ay(std::size_t i, std::size_t a, std::size_t r) const override {
    return values_[spec_.ay_index(i, a, r)];
  }

 private:
  ArraySpec spec_;
  std::vector<double> values_;
};

// First R anchors of both coordinates.
struct AnchorTable {
  std::vector<State> x;
  std::vector<State> y;
};
AnchorTable make_anchors(const Joining& joining, std::size_t R);

// Array evaluated on demand from the sampled particle orbits; entries agree
// with the materialized array.
class OrbitArray final : public ArrayAccess {
 public:
  OrbitArray(const Joining& joining, ArraySpec spec, std::vector<OrbitPair> particles,
             const AnchorTable* anchors);

  const ArraySpec& spec() const override { return spec_; }
  double dx(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const override;
  double dy(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const override;
  double ax(std::size_t i, std::size_t a, std::size_t r) const override;
  double ay(std::size_t i, std::size_t a, std::size_t r) const override;
  void same_time(Side side, std::size_t i, std::size_t j,
                 std::span<double> out) const override;

  const std::vector<OrbitPair>& particles() const { return particles_; }
  ArraySample materialize() const;

 private:
  const Joining* joining_;
  ArraySpec spec_;
  std::vector<OrbitPair> particles_;
  const AnchorTable* anchors_;
};

// Draws n independent particles from the joining (sequentially from `stream`).
OrbitArray sample_orbit_array(const Joining& joining, const ArraySpec& spec,
                              Stream& stream, const AnchorTable* anchors);
ArraySample sample_array(const Joining& joining, const ArraySpec& spec, Stream& stream);

// Map from arrays to a low-dimensional vector with its Lipschitz constant
// for the Euclidean metric on the flattened array.
struct Observable {
  std::string name;
  std::size_t dim = 1;
  double lipschitz = 1.0;
  std::size_t min_n = 1;
  std::size_t min_m = 1;
  std::size_t min_R = 0;
  std::function<void(const ArrayAccess&, std::span<double>)> eval;

  bool compatible(const ArraySpec& spec) const {
    return spec.n >= min_n && spec.m >= min_m && spec.R >= min_R;
  }
};

// Real function on a projected space with its Lipschitz constant.
struct TestFunction {
  std::string name;
  std::size_t input_dim = 2;
  double lipschitz = 1.0;
  std::function<double(std::span<const double>)> eval;
};

// (dX[0,1,0,0], dY[0,1,0,0]).
Observable obs_pair00();
// (aX[0,0,0], aY[0,0,0]).
Observable obs_anchor_pair();
// A_m: orbit-averaged pair distance on each side; Lipschitz m^{-1/2}.
Observable obs_avg_distance(std::size_t m);
// B_m: orbit-averaged ramp chi(d) of the pair distance; chi = 0 on [0,tau],
// 1 on [1, inf), linear between. Lipschitz 1/((1-tau) sqrt m).
Observable obs_mismatch(std::size_t m, double tau);
// Whole flattened array (Lipschitz 1).
Observable obs_identity(const ArraySpec& spec);

double ramp(double d, double tau);

// (a-b)^2 / (2 sqrt2 D): 1-Lipschitz on [0,D]^2.
TestFunction psi_sq(double diameter);
// psi_sq(3/4), the Bernoulli certificate.
TestFunction psi_bernoulli();
// |a-b| / sqrt2.
TestFunction phi_abs();
// Scalar observable f o obs with Lipschitz constant f.L * obs.L.
Observable compose(const TestFunction& f, const Observable& obs);

// Fixed certificate catalogue for coordinate diameters up to `diameter`:
// psi_sq and phi_abs on the pair_00 and first-anchor projections.
std::vector<Observable> test_functions(double diameter);

struct LawProvenance {
  std::string joining;
  std::string left;
  std::string right;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double tail_bound_x = 0.0;
  double tail_bound_y = 0.0;
};

// N i.i.d. array samples, row-major N x spec.size().
class EmpiricalLaw {
 public:
  EmpiricalLaw(ArraySpec spec, std::vector<double> values, LawProvenance provenance);

  const ArraySpec& spec() const { return spec_; }
  std::size_t size() const { return provenance_.samples; }
  std::span<const double> row(std::size_t k) const {
    return {values_.data() + k * spec_.size(), spec_.size()};
  }
  ArraySample sample(std::size_t k) const;
  std::span<const double> values() const { return values_; }
  const LawProvenance& provenance() const { return provenance_; }

 private:
  ArraySpec spec_;
  std::vector<double> values_;
  LawProvenance provenance_;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{1} << 30;

// Sample k uses Stream(seed).split(k).
EmpiricalLaw empirical_law(const Joining& joining, const ArraySpec& spec, std::size_t N,
                           std::uint64_t seed,
                           std::size_t memory_budget = kDefaultMemoryBudget);

// Low-dimensional empirical law, row-major N x dim.
struct ProjectedLaw {
  std::string observable;
  std::size_t dim = 1;
  std::vector<double> values;
  double lipschitz_chain = 1.0;
  LawProvenance provenance;

  std::size_t size() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t k) const {
    return {values.data() + k * dim, dim};
  }
  // Column c as a vector.
  std::vector<double> column(std::size_t c) const;
};

ProjectedLaw project(const EmpiricalLaw& law, const Observable& obs);
// Streams samples through obs without storing arrays; equals
// project(empirical_law(joining, spec, N, seed), obs).
ProjectedLaw projected_law(const Joining& joining, const ArraySpec& spec,
                           const Observable& obs, std::size_t N, std::uint64_t seed);

// Canonical CSV: '#' header lines (spec, provenance, index order, tail
// bounds), one column-name row, then N rows.
void write_csv(const EmpiricalLaw& law, std::ostream& out);
EmpiricalLaw read_csv(std::istream& in);

}  // namespace joinlab
