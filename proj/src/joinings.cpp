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

#include "joinlab/joinings.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>

#include "joinlab/errors.hpp"

namespace joinlab {

namespace {

// Exact systems carry the uniform law on their support.
Rational uniform_mass(std::size_t n) {
  return Rational(1, static_cast<std::int64_t>(n));
}

class ProductJoining final : public Joining {
 public:
  ProductJoining(SystemHandle x, SystemHandle y) : Joining(std::move(x), std::move(y)) {}
  JoiningKind kind() const override { return JoiningKind::product; }
  std::string id() const override { return "product"; }
  OrbitPair sample_orbits(std::size_t m, Stream& stream) const override {
    auto x = left()->sample_orbit(m, stream);
    return {std::move(x), right()->sample_orbit(m, stream)};
  }
  bool has_finite_support() const override {
    return left()->has_exact_mode() && right()->has_exact_mode();
  }
  std::vector<JointAtom> finite_support() const override {
    const auto xs = left()->support();
    const auto ys = right()->support();
    const auto mass = uniform_mass(xs.size() * ys.size());
    std::vector<JointAtom> atoms;
    for (const auto& x : xs)
      for (const auto& y : ys) atoms.push_back({x, y, mass});
    return atoms;
  }
};

class DiagonalJoining final : public Joining {
 public:
  explicit DiagonalJoining(const SystemHandle& x) : Joining(x, x) {}
  JoiningKind kind() const override { return JoiningKind::diagonal; }
  std::string id() const override { return "diagonal"; }
  OrbitPair sample_orbits(std::size_t m, Stream& stream) const override {
    auto x = left()->sample_orbit(m, stream);
    return {x, x};
  }
  bool has_finite_support() const override { return left()->has_exact_mode(); }
  std::vector<JointAtom> finite_support() const override {
    const auto xs = left()->support();
    std::vector<JointAtom> atoms;
    for (const auto& x : xs) atoms.push_back({x, x, uniform_mass(xs.size())});
    return atoms;
  }
};

class GraphJoining final : public Joining {
 public:
  GraphJoining(std::shared_ptr<const GroupRotation> x, double h)
      : Joining(x, x), rotation_(std::move(x)), shift_(h) {}
  JoiningKind kind() const override { return JoiningKind::graph; }
  std::string id() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "graph(h=%.17g)", shift_);
    return buf;
  }
  OrbitPair sample_orbits(std::size_t m, Stream& stream) const override {
    auto x = rotation_->sample_orbit(m, stream);
    auto y = rotation_->translate(x, shift_);
    return {std::move(x), std::move(y)};
  }
  bool has_finite_support() const override { return rotation_->has_exact_mode(); }
  std::vector<JointAtom> finite_support() const override {
    const auto xs = rotation_->support();
    std::vector<JointAtom> atoms;
    for (const auto& x : xs) {
      atoms.push_back({x, rotation_->translate(x, shift_), uniform_mass(xs.size())});
    }
    return atoms;
  }

 private:
  std::shared_ptr<const GroupRotation> rotation_;
  double shift_;
};

class RelIndepJoining final : public Joining {
 public:
  RelIndepJoining(std::shared_ptr<const ProductSystem> x,
                  std::shared_ptr<const ProductSystem> y)
      : Joining(x, y), x_(std::move(x)), y_(std::move(y)) {}
  JoiningKind kind() const override { return JoiningKind::relindep; }
  std::string id() const override { return "relindep(" + x_->factor()->id() + ")"; }
  OrbitPair sample_orbits(std::size_t m, Stream& stream) const override {
    const auto z = x_->factor()->sample_orbit(m, stream);
    const auto a = x_->fiber()->sample_orbit(m, stream);
    const auto b = y_->fiber()->sample_orbit(m, stream);
    return {x_->combine(z, a), y_->combine(z, b)};
  }
  bool has_finite_support() const override {
    return x_->has_exact_mode() && y_->has_exact_mode();
  }
  std::vector<JointAtom> finite_support() const override {
    const auto zs = x_->factor()->support();
    const auto as = x_->fiber()->support();
    const auto bs = y_->fiber()->support();
    const auto mass = uniform_mass(zs.size() * as.size() * bs.size());
    std::vector<JointAtom> atoms;
    for (const auto& z : zs) {
      for (const auto& a : as) {
        for (const auto& b : bs) {
          State x(z), y(z);
          x.insert(x.end(), a.begin(), a.end());
          y.insert(y.end(), b.begin(), b.end());
          atoms.push_back({std::move(x), std::move(y), mass});
        }
      }
    }
    return atoms;
  }

 private:
  std::shared_ptr<const ProductSystem> x_;
  std::shared_ptr<const ProductSystem> y_;
};

class MixtureJoining final : public Joining {
 public:
  MixtureJoining(std::vector<JoiningHandle> components, std::vector<double> weights,
                 std::optional<std::vector<Rational>> exact)
      : Joining(components.front()->left(), components.front()->right()),
        components_(std::move(components)),
        weights_(std::move(weights)),
        exact_(std::move(exact)) {
    double acc = 0.0;
    for (double w : weights_) cumulative_.push_back(acc += w);
  }
  JoiningKind kind() const override { return JoiningKind::mixture; }
  std::string id() const override {
    std::string s = "mixture(";
    for (std::size_t i = 0; i < components_.size(); ++i) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.17g*", weights_[i]);
      s += (i ? "," : "") + std::string(buf) + components_[i]->id();
    }
    return s + ")";
  }
  OrbitPair sample_orbits(std::size_t m, Stream& stream) const override {
    const double u = stream.uniform() * cumulative_.back();
    std::size_t i = 0;
    while (i + 1 < cumulative_.size() && (u >= cumulative_[i] || weights_[i] == 0.0)) ++i;
    return components_[i]->sample_orbits(m, stream);
  }
  bool has_finite_support() const override {
    if (!exact_) return false;
    for (const auto& c : components_)
      if (!c->has_finite_support()) return false;
    return true;
  }
  std::vector<JointAtom> finite_support() const override {
    if (!has_finite_support()) {
      throw InvalidArgument("mixture has no exact finite support (needs rational weights)");
    }
    std::map<std::pair<State, State>, Rational> merged;
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if ((*exact_)[i] == Rational(0)) continue;
      for (const auto& atom : components_[i]->finite_support()) {
        merged[{atom.x, atom.y}] += (*exact_)[i] * atom.mass;
      }
    }
    std::vector<JointAtom> atoms;
    for (auto& [key, mass] : merged) atoms.push_back({key.first, key.second, mass});
    return atoms;
  }

 private:
  std::vector<JoiningHandle> components_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::optional<std::vector<Rational>> exact_;
};

void check_components(const std::vector<JoiningHandle>& components, std::size_t n_weights) {
  require(!components.empty(), "convex_mixture: no components");
  require(components.size() == n_weights, "convex_mixture: weight count mismatch");
  for (const auto& c : components) {
    require(c != nullptr, "convex_mixture: null component");
    require(c->left()->id() == components.front()->left()->id() &&
                c->right()->id() == components.front()->right()->id(),
            "convex_mixture: components couple different systems");
  }
}

}  // namespace

Joining::Joining(SystemHandle left, SystemHandle right)
    : left_(std::move(left)), right_(std::move(right)) {
  require(left_ && right_, "joining: null system");
}

std::pair<State, State> Joining::sample(Stream& stream) const {
  const auto pair = sample_orbits(1, stream);
  const auto x = pair.x.state(0);
  const auto y = pair.y.state(0);
  return {State(x.begin(), x.end()), State(y.begin(), y.end())};
}

std::vector<JointAtom> Joining::finite_support() const {
  throw InvalidArgument("joining " + id() + " has no finite support");
}

JoiningHandle product_joining(SystemHandle x, SystemHandle y) {
  return std::make_shared<ProductJoining>(std::move(x), std::move(y));
}

JoiningHandle diagonal_joining(SystemHandle x) {
  require(x != nullptr, "diagonal_joining: null system");
  return std::make_shared<DiagonalJoining>(x);
}

JoiningHandle diagonal_joining(SystemHandle x, SystemHandle y) {
  require(x && y, "diagonal_joining: null system");
  require(x->id() == y->id(), "diagonal_joining: coordinates are different systems");
  return std::make_shared<DiagonalJoining>(x);
}

JoiningHandle graph_joining_rotation(SystemHandle x, double h) {
  auto rotation = std::dynamic_pointer_cast<const GroupRotation>(x);
  require(rotation != nullptr, "graph_joining_rotation: system is not a group rotation");
  require(rotation->valid_shift(h), "graph_joining_rotation: invalid shift");
  return std::make_shared<GraphJoining>(std::move(rotation), h);
}

JoiningHandle relindep_joining(SystemHandle factor, SystemHandle a, SystemHandle b) {
  require(factor && a && b, "relindep_joining: null system");
  return std::make_shared<RelIndepJoining>(product_system(factor, std::move(a)),
                                           product_system(factor, std::move(b)));
}

JoiningHandle convex_mixture(std::vector<JoiningHandle> components,
                             std::vector<double> weights) {
  check_components(components, weights.size());
  double sum = 0.0;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "convex_mixture: weights must be nonnegative");
    sum += w;
  }
  require(std::fabs(sum - 1.0) <= 1e-12, "convex_mixture: weights must sum to 1");
  return std::make_shared<MixtureJoining>(std::move(components), std::move(weights),
                                          std::nullopt);
}

JoiningHandle convex_mixture(std::vector<JoiningHandle> components,
                             std::vector<Rational> weights) {
  check_components(components, weights.size());
  Rational sum = 0;
  std::vector<double> approx;
  for (const auto& w : weights) {
    require(w >= Rational(0), "convex_mixture: weights must be nonnegative");
    sum += w;
    approx.push_back(to_double(w));
  }
  require(sum == Rational(1), "convex_mixture: weights must sum to 1");
  return std::make_shared<MixtureJoining>(std::move(components), std::move(approx),
                                          std::move(weights));
}

}  // namespace joinlab
