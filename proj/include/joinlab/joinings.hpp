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

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "joinlab/systems.hpp"

namespace joinlab {

struct OrbitPair {
  Orbit x;
  Orbit y;
};

enum class JoiningKind { product, diagonal, graph, relindep, mixture };

// Support point of a finitely supported joining with its exact mass.
struct JointAtom {
  State x;
  State y;
  Rational mass;
};

// A samplable (T x S)-invariant coupling of two systems.
class Joining {
 public:
  virtual ~Joining() = default;

  virtual JoiningKind kind() const = 0;
  virtual std::string id() const = 0;

  const SystemHandle& left() const { return left_; }
  const SystemHandle& right() const { return right_; }

  // One particle: a pair drawn from the joining, with its first m iterates
  // in each coordinate.
  virtual OrbitPair sample_orbits(std::size_t m, Stream& stream) const = 0;
  std::pair<State, State> sample(Stream& stream) const;

  // Exact support for joinings of finite systems; throws otherwise.
  virtual bool has_finite_support() const { return false; }
  virtual std::vector<JointAtom> finite_support() const;

 protected:
  Joining(SystemHandle left, SystemHandle right);

 private:
  SystemHandle left_;
  SystemHandle right_;
};

using JoiningHandle = std::shared_ptr<const Joining>;

JoiningHandle product_joining(SystemHandle x, SystemHandle y);
JoiningHandle diagonal_joining(SystemHandle x);
// Rejects x, y that are not the same system.
JoiningHandle diagonal_joining(SystemHandle x, SystemHandle y);
// x -> (x, x + h) on a circle or cyclic rotation.
JoiningHandle graph_joining_rotation(SystemHandle x, double h);
// Couples Z x A and Z x B through a shared Z coordinate.
JoiningHandle relindep_joining(SystemHandle factor, SystemHandle a, SystemHandle b);
JoiningHandle convex_mixture(std::vector<JoiningHandle> components,
                             std::vector<double> weights);
// Exact weights; enables finite_support() when every component has one.
JoiningHandle convex_mixture(std::vector<JoiningHandle> components,
                             std::vector<Rational> weights);

}  // namespace joinlab
