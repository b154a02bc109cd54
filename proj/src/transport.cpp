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

#include "joinlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "joinlab/errors.hpp"
#include "joinlab/parallel.hpp"

namespace joinlab {

std::string to_string(GapMethod method) {
  switch (method) {
    case GapMethod::quantile_1d:
      return "quantile-1d";
    case GapMethod::assignment_exact:
      return "assignment-exact";
    case GapMethod::kr_dual:
      return "kr-dual";
  }
  return "unknown";
}

nlohmann::json to_json(const GapEstimate& gap) {
  return {{"value", gap.value},
          {"standard_error", gap.standard_error},
          {"method", to_string(gap.method)},
          {"observable", gap.observable},
          {"lipschitz_chain", gap.lipschitz_chain}};
}

nlohmann::json to_json(const DepEstimate& dep) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t k = 0; k < dep.per_joining.size(); ++k) {
    auto j = to_json(dep.per_joining[k]);
    j["joining"] = dep.family[k];
    per.push_back(std::move(j));
  }
  return {{"n", dep.spec.n},   {"m", dep.spec.m},      {"R", dep.spec.R},
          {"p", dep.p},        {"value", dep.value},   {"label", "lower bound over family"},
          {"per_joining", per}};
}

namespace {

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

MeanVar mean_var(std::span<const double> v) {
  MeanVar mv;
  if (v.empty()) return mv;
  // Welford.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : v) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  mv.mean = mean;
  mv.var = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  return mv;
}

GapEstimate scalar_gap(std::span<const double> a, std::span<const double> b,
                       double lipschitz, const std::string& name, double chain) {
  require(std::isfinite(lipschitz) && lipschitz > 0.0,
          "kr_gap: test function " + name + " lacks a positive Lipschitz constant");
  require(!a.empty() && !b.empty(), "kr_gap: empty law");
  const auto ma = mean_var(a);
  const auto mb = mean_var(b);
  GapEstimate g;
  g.value = std::fabs(ma.mean - mb.mean) / lipschitz;
  g.standard_error = std::sqrt(ma.var / static_cast<double>(a.size()) +
                               mb.var / static_cast<double>(b.size())) /
                     lipschitz;
  g.method = GapMethod::kr_dual;
  g.observable = name;
  g.lipschitz_chain = chain;
  return g;
}

}  // namespace

GapEstimate w1_1d(std::vector<double> a, std::vector<double> b) {
  require(a.size() == b.size(), "w1_1d: sample counts differ");
  require(!a.empty(), "w1_1d: empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> gaps(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) gaps[i] = std::fabs(a[i] - b[i]);
  const auto mv = mean_var(gaps);
  GapEstimate g;
  g.value = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(a.size());
  g.standard_error = std::sqrt(mv.var / static_cast<double>(a.size()));
  g.method = GapMethod::quantile_1d;
  return g;
}

Assignment solve_assignment(std::span<const double> cost, std::size_t n) {
  require(cost.size() == n * n, "solve_assignment: cost matrix must be n x n");
  Assignment out;
  if (n == 0) return out;
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Column n is the virtual root of each augmenting tree.
  std::vector<double> u(n, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_row(n + 1, kNone), row_col(n, kNone), way(n + 1, n);

  // Column reduction and greedy tight matching.
  for (std::size_t j = 0; j < n; ++j) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cost[i * n + j] < best) {
        best = cost[i * n + j];
        arg = i;
      }
    }
    v[j] = best;
    if (row_col[arg] == kNone) {
      row_col[arg] = j;
      col_row[j] = arg;
    }
  }
  // Row reduction for free rows.
  for (std::size_t i = 0; i < n; ++i) {
    if (row_col[i] != kNone) continue;
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = cost[i * n + j] - v[j];
      if (c < best) {
        best = c;
        arg = j;
      }
    }
    u[i] = best;
    if (col_row[arg] == kNone) {
      row_col[i] = arg;
      col_row[arg] = i;
    }
  }

  std::vector<double> minv(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (row_col[i] != kNone) continue;
    col_row[n] = i;
    std::size_t j0 = n;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = col_row[j0];
      const double* row = cost.data() + i0 * n;
      const double ui = u[i0];
      double delta = kInf;
      std::size_t j1 = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = row[j] - ui - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_row[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_row[j0] != kNone);
    do {
      const std::size_t j1 = way[j0];
      col_row[j0] = col_row[j1];
      j0 = j1;
    } while (j0 != n);
    for (std::size_t j = 0; j < n; ++j) {
      if (col_row[j] != kNone) row_col[col_row[j]] = j;
    }
  }

  out.row_to_col = std::move(row_col);
  for (std::size_t i = 0; i < n; ++i) out.cost += cost[i * n + out.row_to_col[i]];
  return out;
}

GapEstimate wp_assignment(std::span<const double> a, std::span<const double> b,
                          std::size_t dim, double p, std::size_t cap) {
  require(dim >= 1, "wp_assignment: dimension must be >= 1");
  require(p >= 1.0 && std::isfinite(p), "wp_assignment: p must be >= 1");
  require(a.size() % dim == 0 && b.size() % dim == 0,
          "wp_assignment: dimension mismatch");
  require(a.size() == b.size(), "wp_assignment: sample counts differ");
  const std::size_t n = a.size() / dim;
  require(n >= 1, "wp_assignment: empty samples");
  if (n > cap) throw CapExceeded("wp_assignment: N exceeds the assignment cap");

  std::vector<double> cost(n * n);
  parallel_for(n, [&](std::size_t i) {
    const double* ai = a.data() + i * dim;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * dim;
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = ai[c] - bj[c];
        s += d * d;
      }
      const double e = std::sqrt(s);
      cost[i * n + j] = p == 1.0 ? e : (p == 2.0 ? s : std::pow(e, p));
    }
  });
  const auto match = solve_assignment(cost, n);
  std::vector<double> matched(n);
  for (std::size_t i = 0; i < n; ++i) matched[i] = cost[i * n + match.row_to_col[i]];
  const auto mv = mean_var(matched);
  const double mean_cost = std::max(0.0, match.cost / static_cast<double>(n));

  GapEstimate g;
  g.method = GapMethod::assignment_exact;
  g.value = std::pow(mean_cost, 1.0 / p);
  // Delta method on the mean matched cost.
  const double se_mean = std::sqrt(mv.var / static_cast<double>(n));
  g.standard_error = mean_cost > 0.0
                         ? se_mean * std::pow(mean_cost, 1.0 / p - 1.0) / p
                         : 0.0;
  return g;
}

GapEstimate wp_assignment(const ProjectedLaw& a, const ProjectedLaw& b, double p,
                          std::size_t cap) {
  require(a.dim == b.dim, "wp_assignment: projected dimensions differ");
  auto g = wp_assignment(a.values, b.values, a.dim, p, cap);
  g.observable = a.observable;
  g.lipschitz_chain = a.lipschitz_chain;
  return g;
}

GapEstimate wp_assignment(const EmpiricalLaw& a, const EmpiricalLaw& b, double p,
                          std::size_t cap) {
  require(a.spec() == b.spec(), "wp_assignment: array specs differ");
  auto g = wp_assignment(a.values(), b.values(), a.spec().size(), p, cap);
  g.observable = "array";
  return g;
}

GapEstimate kr_gap(const ProjectedLaw& a, const ProjectedLaw& b, const TestFunction& f) {
  require(a.dim == f.input_dim && b.dim == f.input_dim,
          "kr_gap: test function dimension does not match the laws");
  std::vector<double> fa(a.size()), fb(b.size());
  for (std::size_t k = 0; k < a.size(); ++k) fa[k] = f.eval(a.row(k));
  for (std::size_t k = 0; k < b.size(); ++k) fb[k] = f.eval(b.row(k));
  return scalar_gap(fa, fb, f.lipschitz, f.name + "[" + a.observable + "]",
                    a.lipschitz_chain);
}

GapEstimate kr_gap(const ProjectedLaw& a, const ProjectedLaw& b) {
  require(a.dim == 1 && b.dim == 1, "kr_gap: scalar laws required");
  return scalar_gap(a.values, b.values, a.lipschitz_chain, a.observable, 1.0);
}

GapEstimate kr_gap(const EmpiricalLaw& a, const EmpiricalLaw& b, const Observable& obs) {
  require(obs.dim == 1, "kr_gap: observable must be scalar");
  const auto pa = project(a, obs);
  const auto pb = project(b, obs);
  return kr_gap(pa, pb);
}

CertificateSearch certificate_search(const EmpiricalLaw& a, const EmpiricalLaw& b,
                                     const std::vector<Observable>& catalogue) {
  require(!catalogue.empty(), "certificate_search: empty catalogue");
  CertificateSearch out;
  bool found = false;
  for (const auto& obs : catalogue) {
    if (obs.dim != 1 || !obs.compatible(a.spec())) continue;
    auto g = kr_gap(a, b, obs);
    if (!found || g.value > out.best.value) out.best = g;
    found = true;
    out.candidates.push_back(std::move(g));
  }
  require(found, "certificate_search: no catalogue member fits the array spec");
  return out;
}

DepEstimate dep_lower_bound(const std::vector<JoiningHandle>& family,
                            const ArraySpec& spec, double p, std::size_t N,
                            std::uint64_t seed, std::size_t cap) {
  require(!family.empty(), "dep_lower_bound: empty family");
  const auto& x = family.front()->left();
  const auto& y = family.front()->right();
  for (const auto& j : family) {
    require(j->left()->id() == x->id() && j->right()->id() == y->id(),
            "dep_lower_bound: family members couple different systems");
  }
  const auto reference = empirical_law(*product_joining(x, y), spec, N, seed);
  DepEstimate dep;
  dep.spec = spec;
  dep.p = p;
  for (const auto& j : family) {
    const auto law = empirical_law(*j, spec, N, seed);
    auto g = wp_assignment(law, reference, p, cap);
    dep.family.push_back(j->id());
    dep.value = std::max(dep.value, g.value);
    dep.per_joining.push_back(std::move(g));
  }
  return dep;
}

}  // namespace joinlab
