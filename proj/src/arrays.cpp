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

#include "joinlab/arrays.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "joinlab/errors.hpp"
#include "joinlab/parallel.hpp"

namespace joinlab {

void ArraySpec::validate() const {
  require(n >= 1, "array spec: n must be >= 1");
  require(m >= 1, "array spec: m must be >= 1");
}

std::vector<std::string> ArraySpec::column_names() const {
  std::vector<std::string> names;
  names.reserve(size());
  for (const char* side : {"dX", "dY"}) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a)
          for (std::size_t b = 0; b < m; ++b) {
            names.push_back(std::string(side) + "[" + std::to_string(i) + "," +
                            std::to_string(j) + "," + std::to_string(a) + "," +
                            std::to_string(b) + "]");
          }
  }
  for (const char* side : {"aX", "aY"}) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t r = 0; r < R; ++r) {
          names.push_back(std::string(side) + "[" + std::to_string(i) + "," +
                          std::to_string(a) + "," + std::to_string(r) + "]");
        }
  }
  return names;
}

void ArrayAccess::same_time(Side side, std::size_t i, std::size_t j,
                            std::span<double> out) const {
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = side == Side::x ? dx(i, j, t, t) : dy(i, j, t, t);
  }
}

ArraySample::ArraySample(ArraySpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  require(values_.size() == spec_.size(), "array sample length does not match spec");
}

AnchorTable make_anchors(const Joining& joining, std::size_t R) {
  AnchorTable table;
  for (std::size_t r = 1; r <= R; ++r) {
    table.x.push_back(joining.left()->anchor(r));
    table.y.push_back(joining.right()->anchor(r));
  }
  return table;
}

OrbitArray::OrbitArray(const Joining& joining, ArraySpec spec,
                       std::vector<OrbitPair> particles, const AnchorTable* anchors)
    : joining_(&joining), spec_(spec), particles_(std::move(particles)), anchors_(anchors) {
  require(particles_.size() == spec_.n, "orbit array: particle count mismatch");
  require(spec_.R == 0 || (anchors_ && anchors_->x.size() >= spec_.R &&
                           anchors_->y.size() >= spec_.R),
          "orbit array: anchors missing");
}

double OrbitArray::dx(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
  return joining_->left()->dist(particles_[i].x.state(a), particles_[j].x.state(b));
}
double OrbitArray::dy(std::size_t i, std::size_t j, std::size_t a, std::size_t b) const {
  return joining_->right()->dist(particles_[i].y.state(a), particles_[j].y.state(b));
}
double OrbitArray::ax(std::size_t i, std::size_t a, std::size_t r) const {
  return joining_->left()->dist(particles_[i].x.state(a), anchors_->x[r]);
}
double OrbitArray::ay(std::size_t i, std::size_t a, std::size_t r) const {
  return joining_->right()->dist(particles_[i].y.state(a), anchors_->y[r]);
}
void OrbitArray::same_time(Side side, std::size_t i, std::size_t j,
                           std::span<double> out) const {
  if (side == Side::x) {
    joining_->left()->same_time_distances(particles_[i].x, particles_[j].x, out);
  } else {
    joining_->right()->same_time_distances(particles_[i].y, particles_[j].y, out);
  }
}

ArraySample OrbitArray::materialize() const {
  const auto& s = spec_;
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t j = 0; j < s.n; ++j)
      for (std::size_t a = 0; a < s.m; ++a)
        for (std::size_t b = 0; b < s.m; ++b) {
          v[s.dx_index(i, j, a, b)] = dx(i, j, a, b);
          v[s.dy_index(i, j, a, b)] = dy(i, j, a, b);
        }
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t a = 0; a < s.m; ++a)
      for (std::size_t r = 0; r < s.R; ++r) {
        v[s.ax_index(i, a, r)] = ax(i, a, r);
        v[s.ay_index(i, a, r)] = ay(i, a, r);
      }
  return ArraySample(s, std::move(v));
}

OrbitArray sample_orbit_array(const Joining& joining, const ArraySpec& spec,
                              Stream& stream, const AnchorTable* anchors) {
  spec.validate();
  std::vector<OrbitPair> particles;
  particles.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    particles.push_back(joining.sample_orbits(spec.m, stream));
  }
  return OrbitArray(joining, spec, std::move(particles), anchors);
}

ArraySample sample_array(const Joining& joining, const ArraySpec& spec, Stream& stream) {
  const auto anchors = make_anchors(joining, spec.R);
  return sample_orbit_array(joining, spec, stream, &anchors).materialize();
}

double ramp(double d, double tau) {
  return std::clamp((d - tau) / (1.0 - tau), 0.0, 1.0);
}

Observable obs_pair00() {
  Observable o;
  o.name = "pair00";
  o.dim = 2;
  o.lipschitz = 1.0;
  o.min_n = 2;
  o.eval = [](const ArrayAccess& arr, std::span<double> out) {
    out[0] = arr.dx(0, 1, 0, 0);
    out[1] = arr.dy(0, 1, 0, 0);
  };
  return o;
}

Observable obs_anchor_pair() {
  Observable o;
  o.name = "anchor_pair";
  o.dim = 2;
  o.lipschitz = 1.0;
  o.min_R = 1;
  o.eval = [](const ArrayAccess& arr, std::span<double> out) {
    out[0] = arr.ax(0, 0, 0);
    out[1] = arr.ay(0, 0, 0);
  };
  return o;
}

Observable obs_avg_distance(std::size_t m) {
  require(m >= 1, "obs_avg_distance: m must be >= 1");
  Observable o;
  o.name = "A_" + std::to_string(m);
  o.dim = 2;
  o.lipschitz = 1.0 / std::sqrt(static_cast<double>(m));
  o.min_n = 2;
  o.min_m = m;
  o.eval = [m](const ArrayAccess& arr, std::span<double> out) {
    std::vector<double> d(m);
    for (int s = 0; s < 2; ++s) {
      arr.same_time(s == 0 ? Side::x : Side::y, 0, 1, d);
      double acc = 0.0;
      for (double v : d) acc += v;
      out[static_cast<std::size_t>(s)] = acc / static_cast<double>(m);
    }
  };
  return o;
}

Observable obs_mismatch(std::size_t m, double tau) {
  require(m >= 1, "obs_mismatch: m must be >= 1");
  require(tau > 0.0 && tau < 1.0, "obs_mismatch: tau must lie in (0,1)");
  Observable o;
  o.name = "B_" + std::to_string(m);
  o.dim = 2;
  o.lipschitz = 1.0 / ((1.0 - tau) * std::sqrt(static_cast<double>(m)));
  o.min_n = 2;
  o.min_m = m;
  o.eval = [m, tau](const ArrayAccess& arr, std::span<double> out) {
    std::vector<double> d(m);
    for (int s = 0; s < 2; ++s) {
      arr.same_time(s == 0 ? Side::x : Side::y, 0, 1, d);
      double acc = 0.0;
      for (double v : d) acc += ramp(v, tau);
      out[static_cast<std::size_t>(s)] = acc / static_cast<double>(m);
    }
  };
  return o;
}

Observable obs_identity(const ArraySpec& spec) {
  Observable o;
  o.name = "identity";
  o.dim = spec.size();
  o.lipschitz = 1.0;
  o.min_n = spec.n;
  o.min_m = spec.m;
  o.min_R = spec.R;
  o.eval = [spec](const ArrayAccess& arr, std::span<double> out) {
    if (const auto* s = dynamic_cast<const ArraySample*>(&arr)) {
      std::copy(s->values().begin(), s->values().end(), out.begin());
    } else if (const auto* o = dynamic_cast<const OrbitArray*>(&arr)) {
      const auto v = o->materialize();
      std::copy(v.values().begin(), v.values().end(), out.begin());
    } else {
      throw InvalidArgument("identity observable needs a concrete array");
    }
  };
  return o;
}

TestFunction psi_sq(double diameter) {
  require(diameter > 0.0, "psi_sq: diameter must be positive");
  const double scale = 1.0 / (2.0 * std::sqrt(2.0) * diameter);
  char buf[64];
  std::snprintf(buf, sizeof buf, "psi_sq(D=%.6g)", diameter);
  return {buf, 2, 1.0, [scale](std::span<const double> v) {
            const double d = v[0] - v[1];
            return scale * d * d;
          }};
}

TestFunction psi_bernoulli() {
  auto f = psi_sq(0.75);
  f.name = "psi_bernoulli";
  return f;
}

TestFunction phi_abs() {
  return {"phi_abs", 2, 1.0, [](std::span<const double> v) {
            return std::fabs(v[0] - v[1]) / std::sqrt(2.0);
          }};
}

Observable compose(const TestFunction& f, const Observable& obs) {
  require(f.input_dim == obs.dim, "compose: dimension mismatch");
  Observable o = obs;
  o.name = f.name + "[" + obs.name + "]";
  o.dim = 1;
  o.lipschitz = f.lipschitz * obs.lipschitz;
  o.eval = [f, inner = obs.eval, dim = obs.dim](const ArrayAccess& arr,
                                                 std::span<double> out) {
    double buf[8];
    std::vector<double> heap;
    std::span<double> tmp;
    if (dim <= 8) {
      tmp = std::span<double>(buf, dim);
    } else {
      heap.resize(dim);
      tmp = heap;
    }
    inner(arr, tmp);
    out[0] = f.eval(tmp);
  };
  return o;
}

std::vector<Observable> test_functions(double diameter) {
  const auto sq = psi_sq(diameter);
  const auto ab = phi_abs();
  return {compose(sq, obs_pair00()), compose(ab, obs_pair00()),
          compose(sq, obs_anchor_pair()), compose(ab, obs_anchor_pair())};
}

EmpiricalLaw::EmpiricalLaw(ArraySpec spec, std::vector<double> values,
                           LawProvenance provenance)
    : spec_(spec), values_(std::move(values)), provenance_(std::move(provenance)) {
  require(provenance_.samples >= 1, "empirical law needs N >= 1");
  require(values_.size() == provenance_.samples * spec_.size(),
          "empirical law: value count does not match N x spec size");
}

ArraySample EmpiricalLaw::sample(std::size_t k) const {
  const auto r = row(k);
  return ArraySample(spec_, std::vector<double>(r.begin(), r.end()));
}

namespace {

LawProvenance make_provenance(const Joining& joining, std::uint64_t seed, std::size_t N) {
  return {joining.id(), joining.left()->id(), joining.right()->id(), seed, N,
          joining.left()->tail_bound(), joining.right()->tail_bound()};
}

}  // namespace

EmpiricalLaw empirical_law(const Joining& joining, const ArraySpec& spec, std::size_t N,
                           std::uint64_t seed, std::size_t memory_budget) {
  spec.validate();
  require(N >= 1, "empirical_law: N must be >= 1");
  const double bytes = static_cast<double>(N) * static_cast<double>(spec.size()) * 8.0;
  if (bytes > static_cast<double>(memory_budget)) {
    throw CapExceeded("empirical_law: N x array length exceeds the memory budget");
  }
  const auto anchors = make_anchors(joining, spec.R);
  const Stream master(seed);
  const std::size_t len = spec.size();
  std::vector<double> values(N * len);
  parallel_for(N, [&](std::size_t k) {
    Stream stream = master.split(k);
    const auto arr = sample_orbit_array(joining, spec, stream, &anchors).materialize();
    std::copy(arr.values().begin(), arr.values().end(),
              values.begin() + static_cast<std::ptrdiff_t>(k * len));
  });
  return EmpiricalLaw(spec, std::move(values), make_provenance(joining, seed, N));
}

std::vector<double> ProjectedLaw::column(std::size_t c) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values[k * dim + c];
  return out;
}

ProjectedLaw project(const EmpiricalLaw& law, const Observable& obs) {
  require(obs.compatible(law.spec()), "project: observable " + obs.name +
                                          " incompatible with array spec");
  ProjectedLaw out{obs.name, obs.dim, std::vector<double>(law.size() * obs.dim),
                   obs.lipschitz, law.provenance()};
  parallel_for(law.size(), [&](std::size_t k) {
    const auto sample = law.sample(k);
    obs.eval(sample, std::span<double>(out.values.data() + k * obs.dim, obs.dim));
  });
  return out;
}

ProjectedLaw projected_law(const Joining& joining, const ArraySpec& spec,
                           const Observable& obs, std::size_t N, std::uint64_t seed) {
  spec.validate();
  require(N >= 1, "projected_law: N must be >= 1");
  require(obs.compatible(spec), "projected_law: observable " + obs.name +
                                    " incompatible with array spec");
  const auto anchors = make_anchors(joining, spec.R);
  const Stream master(seed);
  ProjectedLaw out{obs.name, obs.dim, std::vector<double>(N * obs.dim), obs.lipschitz,
                   make_provenance(joining, seed, N)};
  parallel_for(N, [&](std::size_t k) {
    Stream stream = master.split(k);
    const auto arr = sample_orbit_array(joining, spec, stream, &anchors);
    obs.eval(arr, std::span<double>(out.values.data() + k * obs.dim, obs.dim));
  });
  return out;
}

namespace {

constexpr const char* kIndexOrder =
    "dX(i,j,a,b);dY(i,j,a,b);aX(i,a,r);aY(i,a,r) row-major";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const EmpiricalLaw& law, std::ostream& out) {
  const auto& s = law.spec();
  const auto& p = law.provenance();
  out << "# joinlab empirical-law v1\n";
  out << "# n=" << s.n << " m=" << s.m << " R=" << s.R << "\n";
  out << "# joining=" << p.joining << "\n";
  out << "# left=" << p.left << "\n";
  out << "# right=" << p.right << "\n";
  out << "# seed=" << p.seed << "\n";
  out << "# N=" << p.samples << "\n";
  out << "# index_order=" << kIndexOrder << "\n";
  out << "# tail_bound_x=" << fmt(p.tail_bound_x) << " tail_bound_y="
      << fmt(p.tail_bound_y) << "\n";
  const auto names = s.column_names();
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << '"' << names[c] << '"';
  out << "\n";
  for (std::size_t k = 0; k < law.size(); ++k) {
    const auto r = law.row(k);
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << fmt(r[c]);
    out << "\n";
  }
}

EmpiricalLaw read_csv(std::istream& in) {
  std::string line;
  ArraySpec spec;
  LawProvenance prov;
  bool have_spec = false;
  auto value_of = [](const std::string& l, const std::string& key) {
    return l.substr(l.find(key) + key.size());
  };
  while (in.peek() == '#' && std::getline(in, line)) {
    if (line.rfind("# n=", 0) == 0) {
      std::istringstream ss(line.substr(2));
      std::string tok;
      ss >> tok;
      spec.n = std::stoul(tok.substr(2));
      ss >> tok;
      spec.m = std::stoul(tok.substr(2));
      ss >> tok;
      spec.R = std::stoul(tok.substr(2));
      have_spec = true;
    } else if (line.rfind("# joining=", 0) == 0) {
      prov.joining = value_of(line, "joining=");
    } else if (line.rfind("# left=", 0) == 0) {
      prov.left = value_of(line, "left=");
    } else if (line.rfind("# right=", 0) == 0) {
      prov.right = value_of(line, "right=");
    } else if (line.rfind("# seed=", 0) == 0) {
      prov.seed = std::stoull(value_of(line, "seed="));
    } else if (line.rfind("# N=", 0) == 0) {
      prov.samples = std::stoul(value_of(line, "N="));
    } else if (line.rfind("# tail_bound_x=", 0) == 0) {
      std::istringstream ss(line.substr(2));
      std::string a, b;
      ss >> a >> b;
      prov.tail_bound_x = std::stod(a.substr(a.find('=') + 1));
      prov.tail_bound_y = std::stod(b.substr(b.find('=') + 1));
    }
  }
  require(have_spec, "law csv: missing spec header");
  spec.validate();
  require(static_cast<bool>(std::getline(in, line)), "law csv: missing column header");
  std::vector<double> values;
  values.reserve(prov.samples * spec.size());
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(std::stod(cell));
      ++cols;
    }
    require(cols == spec.size(), "law csv: row " + std::to_string(rows) + " has wrong width");
    ++rows;
  }
  require(rows == prov.samples, "law csv: row count does not match N header");
  return EmpiricalLaw(spec, std::move(values), prov);
}

}  // namespace joinlab
