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

#include "joinlab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/Dense>

#include "joinlab/errors.hpp"

namespace joinlab {

namespace {

double frac(double v) {
  double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

double circle_dist(double x, double y) {
  const double d = std::fabs(x - y);
  return std::min(d, 1.0 - d);
}

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CircleRotation final : public GroupRotation {
 public:
  explicit CircleRotation(double alpha) : alpha_(frac(alpha)) {
    require(std::isfinite(alpha), "circle_rotation: alpha must be finite");
  }

  SystemKind kind() const override { return SystemKind::circle; }
  std::string id() const override {
    return "circle(alpha=" + fmt_real(alpha_) + ")";
  }
  std::size_t state_dim() const override { return 1; }
  double diameter_bound() const override { return 0.5; }
  double dist(StateView x, StateView y) const override {
    return circle_dist(x[0], y[0]);
  }
  State sample(Stream& stream) const override { return {stream.uniform()}; }
  State step(StateView x, Stream&) const override {
    return {frac(x[0] + alpha_)};
  }
  Orbit sample_orbit(std::size_t m, Stream& stream) const override {
    const double x0 = stream.uniform();
    std::vector<double> ext(m);
    for (std::size_t t = 0; t < m; ++t) {
      ext[t] = frac(x0 + frac(static_cast<double>(t) * alpha_));
    }
    return Orbit(std::move(ext), 1, 1, m);
  }
  State anchor(std::size_t r) const override { return {dyadic_anchor(r)}; }

  bool valid_shift(double h) const override { return std::isfinite(h); }
  State translate(StateView x, double h) const override {
    return {frac(x[0] + h)};
  }

 private:
  double alpha_;
};

class DoublingMap final : public System {
 public:
  SystemKind kind() const override { return SystemKind::doubling; }
  std::string id() const override { return "doubling"; }
  std::size_t state_dim() const override { return 1; }
  double diameter_bound() const override { return 0.5; }
  double dist(StateView x, StateView y) const override {
    return circle_dist(x[0], y[0]);
  }
  State sample(Stream& stream) const override { return {stream.uniform()}; }
  State step(StateView x, Stream&) const override { return {frac(2.0 * x[0])}; }
  // States carry 53 binary digits; each iterate drops the leading digit and
  // appends a fresh one, so T^t x stays exact and uniformly distributed.
  Orbit sample_orbit(std::size_t m, Stream& stream) const override {
    constexpr std::uint64_t kMask = (std::uint64_t{1} << 53) - 1;
    std::uint64_t digits = stream() >> 11;
    std::vector<double> ext(m);
    for (std::size_t t = 0; t < m; ++t) {
      if (t > 0) {
        digits = ((digits << 1) & kMask) | static_cast<std::uint64_t>(stream.bit());
      }
      ext[t] = static_cast<double>(digits) * 0x1.0p-53;
    }
    return Orbit(std::move(ext), 1, 1, m);
  }
  State anchor(std::size_t r) const override { return {dyadic_anchor(r)}; }
};

class BernoulliShift final : public System {
 public:
  explicit BernoulliShift(int half_width) : half_width_(half_width) {
    require(half_width >= 1, "bernoulli_shift: K must be >= 1");
    const auto dim = static_cast<std::size_t>(2 * half_width + 1);
    weights_.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const int k = static_cast<int>(j) - half_width;
      weights_[j] = std::ldexp(1.0, -std::abs(k) - 2);
    }
  }

  SystemKind kind() const override { return SystemKind::bernoulli; }
  std::string id() const override {
    return "bernoulli(K=" + std::to_string(half_width_) + ")";
  }
  std::size_t state_dim() const override { return weights_.size(); }
  double diameter_bound() const override { return 0.75; }
  double tail_bound() const override { return std::ldexp(1.0, -half_width_ - 1); }
  double dist(StateView x, StateView y) const override {
    double d = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
      if (x[j] != y[j]) d += weights_[j];
    }
    return d;
  }
  State sample(Stream& stream) const override {
    State s(weights_.size());
    for (auto& b : s) b = stream.bit();
    return s;
  }
  State step(StateView x, Stream& stream) const override {
    State s(x.begin() + 1, x.end());
    s.push_back(stream.bit());
    return s;
  }
  // ext[j] holds coordinate j - K of x; iterate t is the window starting at t.
  Orbit sample_orbit(std::size_t m, Stream& stream) const override {
    std::vector<double> ext(weights_.size() + m - 1);
    for (auto& b : ext) b = stream.bit();
    return Orbit(std::move(ext), weights_.size(), 1, m);
  }
  // Binary digits of r-1 set coordinates in the order 0, -1, 1, -2, 2, ...
  State anchor(std::size_t r) const override {
    require(r >= 1, "anchor index must be >= 1");
    State s(weights_.size(), 0.0);
    std::uint64_t v = r - 1;
    for (int b = 0; v != 0 && b < 64; ++b, v >>= 1) {
      if ((v & 1U) == 0) continue;
      const int coord = (b % 2 == 1) ? -(b + 1) / 2 : b / 2;
      if (std::abs(coord) <= half_width_) {
        s[static_cast<std::size_t>(coord + half_width_)] = 1.0;
      }
    }
    return s;
  }

 private:
  int half_width_;
  std::vector<double> weights_;
};

class MarkovShift final : public System {
 public:
  MarkovShift(const Matrix& transition, double beta, double eta, int word_length)
      : transition_(transition),
        stationary_(validate_reversible_chain(transition)),
        beta_(beta),
        eta_(eta),
        word_length_(word_length) {
    require(beta > 0.0 && beta < 1.0, "markov_shift: beta must lie in (0,1)");
    require(eta > 0.0, "markov_shift: eta must be positive");
    require(eta * beta / (1.0 - beta) < 1.0,
            "markov_shift: tau = eta*beta/(1-beta) must be < 1");
    require(word_length >= 1, "markov_shift: L must be >= 1");
    weights_.resize(static_cast<std::size_t>(word_length));
    weights_[0] = 1.0;
    for (std::size_t r = 1; r < weights_.size(); ++r) {
      weights_[r] = eta * std::pow(beta, static_cast<double>(r));
    }
    cumulative_.resize(transition.size());
    for (std::size_t i = 0; i < transition.size(); ++i) {
      std::partial_sum(transition[i].begin(), transition[i].end(),
                       std::back_inserter(cumulative_[i]));
    }
    std::partial_sum(stationary_.begin(), stationary_.end(),
                     std::back_inserter(stationary_cumulative_));
  }

  SystemKind kind() const override { return SystemKind::markov; }
  std::string id() const override {
    std::string s = "markov(P=[";
    for (std::size_t i = 0; i < transition_.size(); ++i) {
      for (std::size_t j = 0; j < transition_.size(); ++j) {
        if (i + j > 0) s += ",";
        s += fmt_real(transition_[i][j]);
      }
    }
    return s + "],beta=" + fmt_real(beta_) + ",eta=" + fmt_real(eta_) +
           ",L=" + std::to_string(word_length_) + ")";
  }
  std::size_t state_dim() const override { return weights_.size(); }
  double diameter_bound() const override {
    return 1.0 + eta_ * beta_ / (1.0 - beta_);
  }
  double tail_bound() const override {
    return eta_ * std::pow(beta_, word_length_) / (1.0 - beta_);
  }
  double dist(StateView x, StateView y) const override {
    double d = 0.0;
    for (std::size_t r = 0; r < weights_.size(); ++r) {
      if (x[r] != y[r]) d += weights_[r];
    }
    return d;
  }
  State sample(Stream& stream) const override {
    State s(weights_.size());
    s[0] = draw(stationary_cumulative_, stream);
    for (std::size_t r = 1; r < s.size(); ++r) s[r] = next(s[r - 1], stream);
    return s;
  }
  State step(StateView x, Stream& stream) const override {
    State s(x.begin() + 1, x.end());
    s.push_back(next(x.back(), stream));
    return s;
  }
  Orbit sample_orbit(std::size_t m, Stream& stream) const override {
    std::vector<double> ext(weights_.size() + m - 1);
    ext[0] = draw(stationary_cumulative_, stream);
    for (std::size_t k = 1; k < ext.size(); ++k) ext[k] = next(ext[k - 1], stream);
    return Orbit(std::move(ext), weights_.size(), 1, m);
  }
  // Words of length 1, 2, ... in lexicographic order, skipping forbidden
  // transitions; each word is completed to length L by the smallest allowed
  // successor.
  State anchor(std::size_t r) const override {
    require(r >= 1, "anchor index must be >= 1");
    const std::size_t n_sym = transition_.size();
    std::size_t remaining = r;
    for (std::size_t len = 1;; ++len) {
      std::vector<std::size_t> word(len, 0);
      while (true) {
        if (admissible(word) && --remaining == 0) return complete(word);
        std::size_t pos = len;
        while (pos > 0 && ++word[pos - 1] == n_sym) word[--pos] = 0;
        if (pos == 0) break;
      }
    }
  }

  // Windowed sums via G_k = e_k + beta G_{k+1}, S_t = G_t - beta^L G_{t+L}.
  void same_time_distances(const Orbit& x, const Orbit& y,
                           std::span<double> out) const override {
    const auto ex = x.extension();
    const auto ey = y.extension();
    const std::size_t len = ex.size();
    const std::size_t word = weights_.size();
    std::vector<double> tail(len + 1, 0.0);
    for (std::size_t k = len; k-- > 0;) {
      tail[k] = (ex[k] != ey[k] ? 1.0 : 0.0) + beta_ * tail[k + 1];
    }
    const double beta_word = std::pow(beta_, static_cast<double>(word));
    for (std::size_t t = 0; t < out.size(); ++t) {
      const double head = ex[t] != ey[t] ? 1.0 : 0.0;
      const double window = tail[t] - beta_word * tail[t + word];
      out[t] = head + eta_ * std::max(0.0, window - head);
    }
  }

 private:
  static double draw(const std::vector<double>& cumulative, Stream& stream) {
    const double u = stream.uniform();
    std::size_t i = 0;
    while (i + 1 < cumulative.size() && u >= cumulative[i]) ++i;
    return static_cast<double>(i);
  }
  double next(double symbol, Stream& stream) const {
    return draw(cumulative_[static_cast<std::size_t>(symbol)], stream);
  }
  bool admissible(const std::vector<std::size_t>& word) const {
    for (std::size_t k = 1; k < word.size(); ++k) {
      if (transition_[word[k - 1]][word[k]] <= 0.0) return false;
    }
    return true;
  }
  State complete(const std::vector<std::size_t>& word) const {
    State s(weights_.size());
    std::size_t last = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k < word.size()) {
        last = word[k];
      } else {
        std::size_t j = 0;
        while (transition_[last][j] <= 0.0) ++j;
        last = j;
      }
      s[k] = static_cast<double>(last);
    }
    return s;
  }

  Matrix transition_;
  std::vector<double> stationary_;
  std::vector<std::vector<double>> cumulative_;
  std::vector<double> stationary_cumulative_;
  double beta_;
  double eta_;
  int word_length_;
  std::vector<double> weights_;
};

class CyclicRotation final : public GroupRotation {
 public:
  CyclicRotation(int order, int generator) : order_(order), generator_(generator) {
    require(order >= 2, "cyclic_rotation: q must be >= 2");
    require(generator >= 0 && generator < order,
            "cyclic_rotation: g must satisfy 0 <= g < q");
  }

  SystemKind kind() const override { return SystemKind::cyclic; }
  std::string id() const override {
    return "cyclic(q=" + std::to_string(order_) + ",g=" + std::to_string(generator_) +
           ")";
  }
  std::size_t state_dim() const override { return 1; }
  double diameter_bound() const override {
    return static_cast<double>(order_ / 2) / order_;
  }
  double dist(StateView x, StateView y) const override {
    return to_double(exact_dist(x, y));
  }
  State sample(Stream& stream) const override {
    return {static_cast<double>(stream.below(static_cast<std::uint64_t>(order_)))};
  }
  State step(StateView x, Stream&) const override { return exact_step(x); }
  Orbit sample_orbit(std::size_t m, Stream& stream) const override {
    const auto x0 = static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(order_)));
    std::vector<double> ext(m);
    for (std::size_t t = 0; t < m; ++t) {
      ext[t] = static_cast<double>((x0 + static_cast<std::int64_t>(t) * generator_) % order_);
    }
    return Orbit(std::move(ext), 1, 1, m);
  }
  State anchor(std::size_t r) const override {
    require(r >= 1, "anchor index must be >= 1");
    return {static_cast<double>((r - 1) % static_cast<std::size_t>(order_))};
  }

  bool has_exact_mode() const override { return true; }
  std::vector<State> support() const override {
    std::vector<State> pts;
    for (int i = 0; i < order_; ++i) pts.push_back({static_cast<double>(i)});
    return pts;
  }
  Rational exact_dist(StateView x, StateView y) const override {
    const auto k = std::abs(static_cast<std::int64_t>(x[0]) - static_cast<std::int64_t>(y[0]));
    return Rational(std::min<std::int64_t>(k, order_ - k), order_);
  }
  State exact_step(StateView x) const override {
    return {static_cast<double>((static_cast<int>(x[0]) + generator_) % order_)};
  }

  bool valid_shift(double h) const override {
    return std::isfinite(h) && h == std::floor(h);
  }
  State translate(StateView x, double h) const override {
    require(valid_shift(h), "cyclic translation must be an integer");
    auto v = (static_cast<std::int64_t>(x[0]) + static_cast<std::int64_t>(h)) % order_;
    if (v < 0) v += order_;
    return {static_cast<double>(v)};
  }

 private:
  int order_;
  int generator_;
};

}  // namespace

Orbit::Orbit(std::vector<double> ext, std::size_t dim, std::size_t shift,
             std::size_t length)
    : ext_(std::move(ext)), dim_(dim), shift_(shift), length_(length) {
  require(length == 0 || (length - 1) * shift + dim <= ext_.size(),
          "orbit extension too short for its length");
}

void System::same_time_distances(const Orbit& x, const Orbit& y,
                                 std::span<double> out) const {
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = dist(x.state(t), y.state(t));
}

std::vector<State> System::support() const {
  throw InvalidArgument(id() + " has no exact mode");
}
Rational System::exact_dist(StateView, StateView) const {
  throw InvalidArgument(id() + " has no exact mode");
}
State System::exact_step(StateView) const {
  throw InvalidArgument(id() + " has no exact mode");
}

Orbit GroupRotation::translate(const Orbit& orbit, double h) const {
  std::vector<double> ext;
  ext.reserve(orbit.length() * orbit.dim());
  for (std::size_t t = 0; t < orbit.length(); ++t) {
    const auto s = translate(orbit.state(t), h);
    ext.insert(ext.end(), s.begin(), s.end());
  }
  return Orbit(std::move(ext), orbit.dim(), orbit.dim(), orbit.length());
}

ProductSystem::ProductSystem(SystemHandle factor, SystemHandle fiber)
    : factor_(std::move(factor)), fiber_(std::move(fiber)) {
  require(factor_ && fiber_, "product_system: null component");
}

std::string ProductSystem::id() const {
  return "product(" + factor_->id() + "," + fiber_->id() + ")";
}
std::size_t ProductSystem::state_dim() const {
  return factor_->state_dim() + fiber_->state_dim();
}
double ProductSystem::diameter_bound() const {
  return std::max(factor_->diameter_bound(), fiber_->diameter_bound());
}
double ProductSystem::tail_bound() const {
  return std::max(factor_->tail_bound(), fiber_->tail_bound());
}
double ProductSystem::dist(StateView x, StateView y) const {
  const auto dz = factor_->state_dim();
  return std::max(factor_->dist(x.first(dz), y.first(dz)),
                  fiber_->dist(x.subspan(dz), y.subspan(dz)));
}

namespace {
State concat(const State& a, const State& b) {
  State s(a);
  s.insert(s.end(), b.begin(), b.end());
  return s;
}
}  // namespace

State ProductSystem::sample(Stream& stream) const {
  auto z = factor_->sample(stream);
  return concat(z, fiber_->sample(stream));
}
State ProductSystem::step(StateView x, Stream& stream) const {
  const auto dz = factor_->state_dim();
  auto z = factor_->step(x.first(dz), stream);
  return concat(z, fiber_->step(x.subspan(dz), stream));
}
Orbit ProductSystem::sample_orbit(std::size_t m, Stream& stream) const {
  auto z = factor_->sample_orbit(m, stream);
  return combine(z, fiber_->sample_orbit(m, stream));
}
Orbit ProductSystem::combine(const Orbit& z, const Orbit& a) const {
  require(z.length() == a.length(), "product orbit components differ in length");
  std::vector<double> ext;
  ext.reserve(z.length() * state_dim());
  for (std::size_t t = 0; t < z.length(); ++t) {
    const auto zs = z.state(t);
    const auto as = a.state(t);
    ext.insert(ext.end(), zs.begin(), zs.end());
    ext.insert(ext.end(), as.begin(), as.end());
  }
  return Orbit(std::move(ext), state_dim(), state_dim(), z.length());
}
// Inverse Cantor pairing of r-1 enumerates all pairs of component anchors.
State ProductSystem::anchor(std::size_t r) const {
  require(r >= 1, "anchor index must be >= 1");
  const std::size_t v = r - 1;
  std::size_t w = 0;
  while ((w + 1) * (w + 2) / 2 <= v) ++w;
  const std::size_t j = v - w * (w + 1) / 2;
  const std::size_t i = w - j;
  return concat(factor_->anchor(i + 1), fiber_->anchor(j + 1));
}
bool ProductSystem::has_exact_mode() const {
  return factor_->has_exact_mode() && fiber_->has_exact_mode();
}
std::vector<State> ProductSystem::support() const {
  std::vector<State> pts;
  for (const auto& z : factor_->support()) {
    for (const auto& a : fiber_->support()) pts.push_back(concat(z, a));
  }
  return pts;
}
Rational ProductSystem::exact_dist(StateView x, StateView y) const {
  const auto dz = factor_->state_dim();
  return std::max(factor_->exact_dist(x.first(dz), y.first(dz)),
                  fiber_->exact_dist(x.subspan(dz), y.subspan(dz)));
}
State ProductSystem::exact_step(StateView x) const {
  const auto dz = factor_->state_dim();
  return concat(factor_->exact_step(x.first(dz)), fiber_->exact_step(x.subspan(dz)));
}

std::vector<double> validate_reversible_chain(const Matrix& transition) {
  const std::size_t n = transition.size();
  require(n >= 2, "transition matrix needs at least two states");
  for (const auto& row : transition) {
    require(row.size() == n, "transition matrix must be square");
    double sum = 0.0;
    for (double p : row) {
      require(std::isfinite(p) && p >= 0.0, "transition entries must be nonnegative");
      sum += p;
    }
    require(std::fabs(sum - 1.0) <= 1e-10, "transition rows must sum to 1");
  }
  // Primitive iff the Wielandt power (n-1)^2+1 is entrywise positive.
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) reach[i][j] = transition[i][j] > 0.0;
  auto power = reach;
  for (std::size_t k = 1; k < (n - 1) * (n - 1) + 1; ++k) {
    std::vector<std::vector<char>> next(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        if (power[i][l])
          for (std::size_t j = 0; j < n; ++j) next[i][j] |= reach[l][j];
    power = std::move(next);
  }
  for (const auto& row : power)
    for (char c : row) require(c != 0, "transition matrix must be irreducible and aperiodic");

  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          transition[j][i] - (i == j ? 1.0 : 0.0);
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  rhs(static_cast<Eigen::Index>(n - 1)) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  std::vector<double> stationary(pi.data(), pi.data() + n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      require(std::fabs(stationary[i] * transition[i][j] -
                        stationary[j] * transition[j][i]) <= 1e-10,
              "transition matrix is not reversible (detailed balance fails)");
    }
  }
  return stationary;
}

double dyadic_anchor(std::size_t r) {
  require(r >= 1, "anchor index must be >= 1");
  if (r == 1) return 0.0;
  const std::size_t v = r - 1;
  int level = 0;
  while ((std::size_t{2} << level) <= v) ++level;
  const std::size_t idx = v - (std::size_t{1} << level);
  return std::ldexp(static_cast<double>(2 * idx + 1), -(level + 1));
}

std::shared_ptr<const GroupRotation> circle_rotation(double alpha) {
  return std::make_shared<CircleRotation>(alpha);
}
SystemHandle doubling_map() { return std::make_shared<DoublingMap>(); }
SystemHandle bernoulli_shift(int half_width) {
  return std::make_shared<BernoulliShift>(half_width);
}
SystemHandle markov_shift(const Matrix& transition, double beta, double eta,
                          int word_length) {
  return std::make_shared<MarkovShift>(transition, beta, eta, word_length);
}
std::shared_ptr<const GroupRotation> cyclic_rotation(int order, int generator) {
  return std::make_shared<CyclicRotation>(order, generator);
}
std::shared_ptr<const ProductSystem> product_system(SystemHandle factor,
                                                    SystemHandle fiber) {
  return std::make_shared<ProductSystem>(std::move(factor), std::move(fiber));
}

}  // namespace joinlab
