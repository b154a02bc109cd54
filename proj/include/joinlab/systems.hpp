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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "joinlab/random.hpp"
#include "joinlab/rational.hpp"

namespace joinlab {

// Encoded point of a system's state space. The encoding is system specific:
// one coordinate on the circle, 2K+1 bits for a Bernoulli window, L symbols
// for a Markov word, the residue for a cyclic group, concatenations for
// products.
using State = std::vector<double>;
using StateView = std::span<const double>;

// An orbit segment x, Tx, ..., T^{m-1}x backed by one extended
// configuration. State t is the window ext[t*shift, t*shift + dim).
class Orbit {
 public:
  Orbit() = default;
  Orbit(std::vector<double> ext, std::size_t dim, std::size_t shift,
        std::size_t length);

  std::size_t length() const { return length_; }
  std::size_t dim() const { return dim_; }
  std::size_t shift() const { return shift_; }
  StateView state(std::size_t t) const {
    return {ext_.data() + t * shift_, dim_};
  }
  std::span<const double> extension() const { return ext_; }

 private:
  std::vector<double> ext_;
  std::size_t dim_ = 0;
  std::size_t shift_ = 0;
  std::size_t length_ = 0;
};

enum class SystemKind { circle, doubling, bernoulli, markov, cyclic, product };

// A compact metric measure-preserving system (X, d, mu, T) together with a
// fixed dense anchor sequence. Implementations are immutable and every random
// operation takes an explicit stream.
class System {
 public:
  virtual ~System() = default;

  virtual SystemKind kind() const = 0;
  // Canonical descriptor, e.g. "bernoulli(K=24)".
  virtual std::string id() const = 0;
  virtual std::size_t state_dim() const = 0;
  // Upper bound of the untruncated metric.
  virtual double diameter_bound() const = 0;
  // Bound on |truncated metric - untruncated metric|.
  virtual double tail_bound() const { return 0.0; }

  virtual double dist(StateView x, StateView y) const = 0;
  virtual State sample(Stream& stream) const = 0;
  // Bernoulli and Markov shifts fill the exposed coordinate from `stream`.
  virtual State step(StateView x, Stream& stream) const = 0;
  virtual Orbit sample_orbit(std::size_t m, Stream& stream) const = 0;
  // Deterministic dense sequence, r >= 1. Part of the on-disk contract.
  virtual State anchor(std::size_t r) const = 0;

  // out[t] = d(T^t x, T^t x') for t < out.size().
  virtual void same_time_distances(const Orbit& x, const Orbit& y,
                                   std::span<double> out) const;

  // Exact mode (finite systems only).
  virtual bool has_exact_mode() const { return false; }
  virtual std::vector<State> support() const;
  virtual Rational exact_dist(StateView x, StateView y) const;
  virtual State exact_step(StateView x) const;
};

using SystemHandle = std::shared_ptr<const System>;

// Compact abelian rotations that admit graph joinings x -> (x, x+h).
class GroupRotation : public System {
 public:
  virtual bool valid_shift(double h) const = 0;
  virtual State translate(StateView x, double h) const = 0;
  Orbit translate(const Orbit& orbit, double h) const;
};

// Z x A with product dynamics and the max metric.
class ProductSystem : public System {
 public:
  ProductSystem(SystemHandle factor, SystemHandle fiber);

  const SystemHandle& factor() const { return factor_; }
  const SystemHandle& fiber() const { return fiber_; }
  // Orbit of (z, a) from coordinate orbits of equal length.
  Orbit combine(const Orbit& z, const Orbit& a) const;

  SystemKind kind() const override { return SystemKind::product; }
  std::string id() const override;
  std::size_t state_dim() const override;
  double diameter_bound() const override;
  double tail_bound() const override;
  double dist(StateView x, StateView y) const override;
  State sample(Stream& stream) const override;
  State step(StateView x, Stream& stream) const override;
  Orbit sample_orbit(std::size_t m, Stream& stream) const override;
  State anchor(std::size_t r) const override;
  bool has_exact_mode() const override;
  std::vector<State> support() const override;
  Rational exact_dist(StateView x, StateView y) const override;
  State exact_step(StateView x) const override;

 private:
  SystemHandle factor_;
  SystemHandle fiber_;
};

using Matrix = std::vector<std::vector<double>>;

// Validates that P is stochastic, irreducible, aperiodic and reversible
// (detailed balance to 1e-10); returns the stationary law.
std::vector<double> validate_reversible_chain(const Matrix& transition);

inline constexpr double kGoldenAngle = 0.61803398874989484820;

std::shared_ptr<const GroupRotation> circle_rotation(double alpha = kGoldenAngle);
SystemHandle doubling_map();
SystemHandle bernoulli_shift(int half_width = 24);
SystemHandle markov_shift(const Matrix& transition, double beta, double eta,
                          int word_length = 48);
std::shared_ptr<const GroupRotation> cyclic_rotation(int order, int generator);
std::shared_ptr<const ProductSystem> product_system(SystemHandle factor,
                                                    SystemHandle fiber);

// Dyadic anchor enumeration on the circle: 0, 1/2, 1/4, 3/4, 1/8, ...
double dyadic_anchor(std::size_t r);

}  // namespace joinlab
