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

#include "joinlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>

#include "joinlab/analytics.hpp"
#include "joinlab/errors.hpp"
#include "joinlab/kernelspace.hpp"
#include "joinlab/transport.hpp"

namespace joinlab {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ReportRow make_row(std::string check, std::string parameter, double estimate, double se,
                   double reference, double lower, double upper, std::string source,
                   RowProvenance provenance) {
  ReportRow row{std::move(check), std::move(parameter), estimate, se, reference,
                lower, upper, false, std::move(source), std::move(provenance)};
  row.pass = !std::isnan(estimate) && lower <= estimate && estimate <= upper;
  return row;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(v.size());
  const double var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

// Unbiased sample variance with the plug-in standard error sqrt((m4 - s^4)/N).
MeanSe variance_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double var = m2 / (n - 1.0);
  m4 /= n;
  return {var, std::sqrt(std::max(0.0, m4 - (m2 / n) * (m2 / n)) / n)};
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

std::string param_m(std::size_t m) { return "m=" + std::to_string(m); }

RowProvenance provenance_of(const LawProvenance& p, std::string laws) {
  return {p.seed, p.samples, p.tail_bound_x, p.tail_bound_y, std::move(laws)};
}

// Typed access to the "params" section with a fixed key set.
class Params {
 public:
  Params(const ExperimentConfig& config, std::vector<std::string> allowed)
      : params_(config.params) {
    for (const auto& [key, value] : params_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw InvalidArgument("config: unknown parameter '" + key + "' for " +
                              config.experiment);
      }
    }
  }
  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!params_.contains(key)) return fallback;
    try {
      return params_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: parameter '" + key + "' has the wrong type");
    }
  }

 private:
  const json& params_;
};

std::vector<std::size_t> positive_list(std::vector<std::size_t> v, const char* what) {
  require(!v.empty(), std::string("config: ") + what + " must be non-empty");
  for (auto x : v) require(x >= 1, std::string("config: ") + what + " entries must be >= 1");
  return v;
}

std::size_t samples_or(const ExperimentConfig& config, std::size_t fallback) {
  const std::size_t n = config.samples.value_or(fallback);
  require(n >= 2, "config: samples must be >= 2");
  return n;
}

double circle_dist(double u) {
  u -= std::floor(u);
  return std::min(u, 1.0 - u);
}

Matrix matrix_from_json(const json& j) {
  Matrix p;
  if (!j.empty() && j.front().is_array()) {
    p = j.get<Matrix>();
  } else {
    const auto flat = j.get<std::vector<double>>();
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(flat.size())));
    require(side * side == flat.size() && side > 0, "markov: flat P must be square");
    p.assign(side, std::vector<double>(side));
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j2 = 0; j2 < side; ++j2) p[i][j2] = flat[i * side + j2];
  }
  return p;
}

void expect_keys(const json& obj, const std::vector<std::string>& allowed,
                 const std::string& context) {
  require(obj.is_object(), context + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument(context + ": unknown key '" + key + "'");
    }
  }
}

// ---------------------------------------------------------------------------

Report bernoulli_nondec(const ExperimentConfig& config) {
  const Params params(config, {"K", "m"});
  const int K = params.get<int>("K", 24);
  const auto ms = positive_list(params.get<std::vector<std::size_t>>("m", {1, 4, 16}), "m");
  const std::size_t N = samples_or(config, 100000);
  const double k = config.se_multiplier;

  const auto sys = bernoulli_shift(K);
  const auto diag = diagonal_joining(sys);
  const auto prod = product_joining(sys, sys);
  const double oracle = bernoulli_certificate_value();
  const double correction = std::fabs(oracle - bernoulli_certificate_value(K));

  Report report{"bernoulli-nondec", {}};
  for (auto m : ms) {
    const ArraySpec spec{2, m, 0};
    const auto a = projected_law(*diag, spec, obs_pair00(), N, derive_seed(config.seed, 2 * m));
    const auto b =
        projected_law(*prod, spec, obs_pair00(), N, derive_seed(config.seed, 2 * m + 1));
    const auto gap = kr_gap(a, b, psi_bernoulli());
    const double half = k * gap.standard_error + correction;
    report.rows.push_back(make_row("kr_gap[psi_bernoulli]", param_m(m), gap.value,
                                   gap.standard_error, oracle, oracle - half, oracle + half,
                                   "closed form 5/(144 sqrt2); band adds |c(inf)-c(K)|",
                                   provenance_of(b.provenance, "diagonal vs product")));
  }
  return report;
}

Report doubling_variance(const ExperimentConfig& config) {
  const Params params(config, {"m", "rel_tol"});
  const auto ms = positive_list(
      params.get<std::vector<std::size_t>>("m", {1, 2, 4, 8, 16, 32, 64, 128, 256}), "m");
  const double rel_tol = params.get<double>("rel_tol", 0.05);
  const std::size_t N = samples_or(config, 100000);
  const auto sys = doubling_map();
  const auto prod = product_joining(sys, sys);

  Report report{"doubling-variance", {}};
  for (auto m : ms) {
    const auto law = projected_law(*prod, ArraySpec{2, m, 0}, obs_avg_distance(m), N,
                                   derive_seed(config.seed, m));
    const auto v = variance_se(law.column(0));
    const double oracle = doubling_var_Am(m);
    report.rows.push_back(make_row("var(A_m)", param_m(m), v.mean, v.se, oracle,
                                   oracle * (1.0 - rel_tol), oracle * (1.0 + rel_tol),
                                   "closed form 1/(48 m); relative band",
                                   provenance_of(law.provenance, "product")));
  }
  return report;
}

Report doubling_rate(const ExperimentConfig& config) {
  const Params params(config, {"m", "kr_samples"});
  const auto ms = positive_list(params.get<std::vector<std::size_t>>("m", {1, 4, 16, 64}), "m");
  const std::size_t N = samples_or(config, 2000);
  const std::size_t kr_n = params.get<std::size_t>("kr_samples", 100000);
  require(kr_n >= 2, "config: kr_samples must be >= 2");
  const double k = config.se_multiplier;
  const auto sys = doubling_map();
  const auto diag = diagonal_joining(sys);
  const auto prod = product_joining(sys, sys);
  const auto psi = psi_sq(0.5);

  Report report{"doubling-rate", {}};
  for (auto m : ms) {
    const ArraySpec spec{2, m, 0};
    const auto obs = obs_avg_distance(m);
    const auto bounds = doubling_rate_bounds(m);
    const auto a = projected_law(*diag, spec, obs, N, derive_seed(config.seed, 4 * m));
    const auto b = projected_law(*prod, spec, obs, N, derive_seed(config.seed, 4 * m + 1));
    const auto w = wp_assignment(a, b, 1.0);
    const auto prov = provenance_of(b.provenance, "diagonal vs product");
    report.rows.push_back(make_row("w1_assignment", param_m(m), w.value, w.standard_error,
                                   bounds.lower, bounds.lower - k * w.standard_error,
                                   bounds.upper + k * w.standard_error,
                                   "1/(24 sqrt2 m) <= W1 <= 1/sqrt(24 m)", prov));
    const auto same = kr_gap(a, b, psi);
    const double slack = k * combined(same.standard_error, w.standard_error);
    report.rows.push_back(make_row("kr_minus_w1[psi_sq]", param_m(m), same.value - w.value,
                                   combined(same.standard_error, w.standard_error), 0.0, -kInf,
                                   slack, "KR <= W1 on the same samples", prov));

    const auto a2 = projected_law(*diag, spec, obs, kr_n, derive_seed(config.seed, 4 * m + 2));
    const auto b2 = projected_law(*prod, spec, obs, kr_n, derive_seed(config.seed, 4 * m + 3));
    const auto gap = kr_gap(a2, b2, psi);
    report.rows.push_back(make_row(
        "kr_gap[psi_sq]", param_m(m), gap.value, gap.standard_error, bounds.lower,
        bounds.lower - k * gap.standard_error, bounds.lower + k * gap.standard_error,
        "closed form 1/(24 sqrt2 m)", provenance_of(b2.provenance, "diagonal vs product")));
  }
  return report;
}

Report markov_rate(const ExperimentConfig& config) {
  const Params params(config, {"P", "beta", "eta", "L", "m", "limit_m", "assignment_samples",
                               "rel_tol"});
  const Matrix P = params.get<json>("P", json()).is_null()
                       ? Matrix{{0.7, 0.3}, {0.3, 0.7}}
                       : matrix_from_json(params.get<json>("P", json()));
  const double beta = params.get<double>("beta", 0.5);
  const double eta = params.get<double>("eta", 0.5);
  const int L = params.get<int>("L", 48);
  const auto ms = positive_list(
      params.get<std::vector<std::size_t>>("m", {16, 64, 256, 1024, 4096}), "m");
  const auto limit_ms = positive_list(
      params.get<std::vector<std::size_t>>("limit_m", {*std::max_element(ms.begin(), ms.end())}),
      "limit_m");
  const std::size_t N = samples_or(config, 100000);
  const std::size_t assign_n = params.get<std::size_t>("assignment_samples", 2000);
  const double rel_tol = params.get<double>("rel_tol", 0.05);
  const double k = config.se_multiplier;

  const auto sys = markov_shift(P, beta, eta, L);
  const auto diag = diagonal_joining(sys);
  const auto prod = product_joining(sys, sys);
  const double tau = eta * beta / (1.0 - beta);
  const auto spectrum = markov_spectrum(P);
  const double limit = markov_abs_diff_limit(spectrum);

  Report report{"markov-rate", {}};
  const RowProvenance analytic{config.seed, 0, 0.0, 0.0, "analytic"};
  report.rows.push_back(make_row(
      "sigma_h2_series_minus_spectral", "", spectrum.sigma_h2_series - spectrum.sigma_h2_spectral,
      0.0, 0.0, -1e-10, 1e-10, "covariance series vs product eigenbasis", analytic));
  const double quad = gaussian_abs_diff_quadrature(std::sqrt(spectrum.sigma_h2_spectral));
  report.rows.push_back(make_row("gaussian_abs_diff_quadrature", "", quad, 0.0, limit,
                                 limit - 1e-8, limit + 1e-8, "2 sigma_h / sqrt(pi)", analytic));

  for (auto m : ms) {
    const ArraySpec spec{2, m, 0};
    const auto obs = obs_mismatch(m, tau);
    const double upper = markov_rate_bounds(spectrum, m).upper;
    const auto a = projected_law(*diag, spec, obs, assign_n, derive_seed(config.seed, 4 * m));
    const auto b = projected_law(*prod, spec, obs, assign_n, derive_seed(config.seed, 4 * m + 1));
    const auto w = wp_assignment(a, b, 1.0);
    const auto prov = provenance_of(b.provenance, "diagonal vs product");
    report.rows.push_back(make_row("w1_assignment", param_m(m), w.value, w.standard_error, upper,
                                   -kInf, upper + k * w.standard_error,
                                   "sqrt(2 v_h (1+theta) / (m (1-theta)))", prov));
    const auto kr = kr_gap(a, b, phi_abs());
    report.rows.push_back(make_row("kr_minus_w1[phi_abs]", param_m(m), kr.value - w.value,
                                   combined(kr.standard_error, w.standard_error), 0.0, -kInf,
                                   k * combined(kr.standard_error, w.standard_error),
                                   "KR <= W1 on the same samples", prov));
  }
  for (auto m : limit_ms) {
    const auto law = projected_law(*prod, ArraySpec{2, m, 0}, obs_mismatch(m, tau), N,
                                   derive_seed(config.seed, 4 * m + 2));
    std::vector<double> scaled(law.size());
    const double root = std::sqrt(static_cast<double>(m));
    for (std::size_t s = 0; s < law.size(); ++s) {
      scaled[s] = root * std::fabs(law.row(s)[0] - law.row(s)[1]);
    }
    const auto est = mean_se(scaled);
    report.rows.push_back(make_row("sqrt_m_mean_abs_diff", param_m(m), est.mean, est.se, limit,
                                   limit * (1.0 - rel_tol), limit * (1.0 + rel_tol),
                                   "2 sigma_h / sqrt(pi); relative band",
                                   provenance_of(law.provenance, "product")));
  }
  return report;
}

Report rotation_blind(const ExperimentConfig& config) {
  const Params params(config, {"alpha", "q", "g", "m", "h_circle", "h_cyclic"});
  const double alpha = params.get<double>("alpha", kGoldenAngle);
  const int q = params.get<int>("q", 64);
  const int g = params.get<int>("g", 5);
  const std::size_t m = params.get<std::size_t>("m", 8);
  const double h_circle = params.get<double>("h_circle", 0.3);
  const double h_cyclic = params.get<double>("h_cyclic", 17.0);
  const std::size_t N = samples_or(config, 1000);
  require(m >= 1, "config: m must be >= 1");

  struct Case {
    std::string system;
    SystemHandle sys;
    double h;
    double tol;
    std::function<double(std::size_t, std::size_t)> formula;
  };
  std::vector<Case> cases;
  cases.push_back({"circle", circle_rotation(alpha), h_circle, 1e-12,
                   [alpha](std::size_t a, std::size_t b) {
                     return circle_dist((static_cast<double>(b) - static_cast<double>(a)) * alpha);
                   }});
  cases.push_back({"cyclic", cyclic_rotation(q, g), h_cyclic, 0.0,
                   [q, g](std::size_t a, std::size_t b) {
                     const auto steps = static_cast<std::int64_t>(b) - static_cast<std::int64_t>(a);
                     std::int64_t r = (steps * g) % q;
                     if (r < 0) r += q;
                     return to_double(Rational(std::min<std::int64_t>(r, q - r), q));
                   }});

  Report report{"rotation-blind", {}};
  const ArraySpec spec{1, m, 0};
  std::uint64_t tag = 0;
  for (const auto& c : cases) {
    const std::vector<std::pair<std::string, JoiningHandle>> joinings{
        {"product", product_joining(c.sys, c.sys)},
        {"diagonal", diagonal_joining(c.sys)},
        {"graph", graph_joining_rotation(c.sys, c.h)}};
    for (const auto& [label, joining] : joinings) {
      const auto law = empirical_law(*joining, spec, N, derive_seed(config.seed, ++tag));
      double max_range = 0.0, max_dev = 0.0;
      for (std::size_t e = 0; e < spec.size(); ++e) {
        double lo = kInf, hi = -kInf;
        for (std::size_t s = 0; s < law.size(); ++s) {
          lo = std::min(lo, law.row(s)[e]);
          hi = std::max(hi, law.row(s)[e]);
        }
        max_range = std::max(max_range, hi - lo);
      }
      for (std::size_t s = 0; s < law.size(); ++s) {
        const auto sample = law.sample(s);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) {
            const double f = c.formula(a, b);
            max_dev = std::max(max_dev, std::fabs(sample.dx(0, 0, a, b) - f));
            max_dev = std::max(max_dev, std::fabs(sample.dy(0, 0, a, b) - f));
          }
        }
      }
      const auto prov = provenance_of(law.provenance(), label);
      const std::string param = c.system + "/" + label;
      report.rows.push_back(make_row("max_entry_range", param, max_range, 0.0, 0.0, 0.0, c.tol,
                                     "deterministic single-orbit matrix", prov));
      report.rows.push_back(make_row("max_dev_from_d(0,(b-a)g)", param, max_dev, 0.0, 0.0, 0.0,
                                     c.tol, "rotation formula", prov));
    }
  }
  return report;
}

Rational cyclic_var_of(int q, const std::function<Rational(Rational)>& f) {
  Rational mean = 0, second = 0;
  for (int k = 0; k < q; ++k) {
    const Rational v = f(Rational(std::min(k, q - k), q));
    mean += v / q;
    second += v * v / q;
  }
  return second - mean * mean;
}

Report rotation_graph(const ExperimentConfig& config) {
  const Params params(config, {"q", "g", "m", "h"});
  const int q = params.get<int>("q", 12);
  const int g = params.get<int>("g", 1);
  const std::size_t m = params.get<std::size_t>("m", 2);
  const int h = params.get<int>("h", 5);
  const std::size_t N = samples_or(config, 20000);
  const double k = config.se_multiplier;
  const auto sys = cyclic_rotation(q, g);
  const ArraySpec spec{2, m, 0};
  const RowProvenance exact{config.seed, 0, 0.0, 0.0, "exact enumeration"};

  Report report{"rotation-graph", {}};
  const auto reference = cyclic_exact_law(*graph_joining_rotation(sys, 0.0), spec);
  double differing = 0.0;
  for (int shift = 1; shift < q; ++shift) {
    if (!(cyclic_exact_law(*graph_joining_rotation(sys, shift), spec) == reference)) {
      differing += 1.0;
    }
  }
  report.rows.push_back(make_row("h_with_law_differing_from_h0", "q=" + std::to_string(q),
                                 differing, 0.0, 0.0, 0.0, 0.0, "law independent of h", exact));

  const ArraySpec pair{2, 1, 0};
  auto sq_gap = [&pair](const std::vector<Rational>& key) {
    const Rational d = key[pair.dx_index(0, 1, 0, 0)] - key[pair.dy_index(0, 1, 0, 0)];
    return d * d;
  };
  const auto graph_law = cyclic_exact_law(*graph_joining_rotation(sys, h), pair);
  const auto prod_law = cyclic_exact_law(*product_joining(sys, sys), pair);
  const Rational gap =
      exact_expectation(prod_law, sq_gap) - exact_expectation(graph_law, sq_gap);
  const Rational oracle = 2 * cyclic_var_of(q, [](Rational r) { return r; });
  const double oracle_d = to_double(oracle);
  report.rows.push_back(make_row("exact_gap_E(dX-dY)^2", "h=" + std::to_string(h),
                                 gap == oracle ? oracle_d : to_double(gap), 0.0, oracle_d,
                                 oracle_d, oracle_d, "2 Var(R) by direct residue sum", exact));

  const ArraySpec anchored{2, 1, 1};
  const auto la = empirical_law(*graph_joining_rotation(sys, h), anchored, N,
                                derive_seed(config.seed, 1));
  const auto lb = empirical_law(*product_joining(sys, sys), anchored, N,
                                derive_seed(config.seed, 2));
  const auto search = certificate_search(la, lb, test_functions(sys->diameter_bound()));
  report.rows.push_back(make_row("certificate_search_best", search.best.observable,
                                 search.best.value, search.best.standard_error, 0.0,
                                 k * search.best.standard_error, kInf, "separation > k SE",
                                 provenance_of(lb.provenance(), "graph vs product")));
  return report;
}

Report anchored_low(const ExperimentConfig& config) {
  const Params params(config, {"K"});
  const int K = params.get<int>("K", 24);
  const std::size_t N = samples_or(config, 100000);
  const double k = config.se_multiplier;
  const auto sys = bernoulli_shift(K);
  const ArraySpec spec{1, 1, 1};

  Report report{"anchored-low", {}};
  const auto anchor = sys->anchor(1);
  double ones = 0.0;
  for (double b : anchor) ones += b;
  report.rows.push_back(make_row("first_anchor_nonzero_coordinates", "", ones, 0.0, 0.0, 0.0,
                                 0.0, "anchor enumeration", {config.seed, 0, 0.0, 0.0, "anchor"}));

  const double oracle = 2.0 * bernoulli_var_R();
  const double correction = std::fabs(oracle - 2.0 * bernoulli_var_R(K));
  const std::vector<std::tuple<std::string, JoiningHandle, double, double>> cases{
      {"diagonal", diagonal_joining(sys), 0.0, 0.0},
      {"product", product_joining(sys, sys), oracle, correction}};
  std::uint64_t tag = 0;
  for (const auto& [label, joining, ref, corr] : cases) {
    const auto law =
        projected_law(*joining, spec, obs_anchor_pair(), N, derive_seed(config.seed, ++tag));
    std::vector<double> sq(law.size());
    for (std::size_t s = 0; s < law.size(); ++s) {
      const double d = law.row(s)[0] - law.row(s)[1];
      sq[s] = d * d;
    }
    const auto est = mean_se(sq);
    const double half = k * est.se + corr;
    report.rows.push_back(make_row("E(D_X-D_Y)^2", label, est.mean, est.se, ref, ref - half,
                                   ref + half,
                                   label == "diagonal" ? "identical coordinates"
                                                       : "closed form 5/96; band adds truncation",
                                   provenance_of(law.provenance, label)));
  }
  return report;
}

struct CommonFactorSetup {
  SystemHandle factor;
  SystemHandle fiber;
  JoiningHandle relindep;
  JoiningHandle product;
};

CommonFactorSetup common_factor_setup(int q, int g, double alpha) {
  CommonFactorSetup s;
  s.factor = cyclic_rotation(q, g);
  s.fiber = circle_rotation(alpha);
  s.relindep = relindep_joining(s.factor, s.fiber, s.fiber);
  s.product = product_joining(s.relindep->left(), s.relindep->right());
  return s;
}

Report common_factor(const ExperimentConfig& config) {
  const Params params(config, {"q", "g", "alpha"});
  const int q = params.get<int>("q", 2);
  const int g = params.get<int>("g", 1);
  const double alpha = params.get<double>("alpha", kGoldenAngle);
  const std::size_t N = samples_or(config, 100000);
  const double k = config.se_multiplier;
  const auto setup = common_factor_setup(q, g, alpha);
  const ArraySpec spec{2, 1, 1};
  const double diameter = setup.relindep->left()->diameter_bound();
  const auto catalogue = test_functions(diameter);

  const auto rel = empirical_law(*setup.relindep, spec, N, derive_seed(config.seed, 1));
  const auto prod = empirical_law(*setup.product, spec, N, derive_seed(config.seed, 2));
  const auto prod2 = empirical_law(*setup.product, spec, N, derive_seed(config.seed, 3));

  Report report{"common-factor", {}};
  const auto witness = certificate_search(rel, prod, catalogue);
  report.rows.push_back(make_row("certificate_search_best", "relindep/" + witness.best.observable,
                                 witness.best.value, witness.best.standard_error, 0.0,
                                 k * witness.best.standard_error, kInf, "separation > k SE",
                                 provenance_of(prod.provenance(), "relindep vs product")));
  const auto null = certificate_search(prod2, prod, catalogue);
  report.rows.push_back(make_row("certificate_search_best", "product/" + null.best.observable,
                                 null.best.value, null.best.standard_error, 0.0, 0.0,
                                 k * null.best.standard_error, "no separation",
                                 provenance_of(prod.provenance(), "product vs product")));

  // Pair-distance certificate: the gap in E(dX-dY)^2 is 2 Var(c^2) for the
  // factor distance c when the fibers are circle rotations.
  const Rational var_c2 = cyclic_var_of(q, [](Rational r) { return r * r; });
  const double oracle = 2.0 * to_double(var_c2) / (2.0 * std::numbers::sqrt2 * diameter);
  for (const auto& cand : witness.candidates) {
    if (cand.observable.rfind("psi_sq", 0) == 0 &&
        cand.observable.find("[pair00]") != std::string::npos) {
      report.rows.push_back(make_row(
          "kr_gap", "relindep/" + cand.observable, cand.value, cand.standard_error, oracle,
          oracle - k * cand.standard_error, oracle + k * cand.standard_error,
          "2 Var(c^2) / (2 sqrt2 D)", provenance_of(prod.provenance(), "relindep vs product")));
    }
  }
  return report;
}

Report certificates(const ExperimentConfig& config) {
  const Params params(config, {"K", "q", "h"});
  const int K = params.get<int>("K", 24);
  const int q = params.get<int>("q", 12);
  const int h = params.get<int>("h", 5);
  const std::size_t N = samples_or(config, 2000);
  const double k = config.se_multiplier;
  const ArraySpec spec{2, 1, 1};

  const auto bern = bernoulli_shift(K);
  const auto dbl = doubling_map();
  const auto cyc = cyclic_rotation(q, 1);
  const auto cf = common_factor_setup(2, 1, kGoldenAngle);
  const std::vector<std::tuple<std::string, JoiningHandle, JoiningHandle>> pairs{
      {"bernoulli diagonal/product", diagonal_joining(bern), product_joining(bern, bern)},
      {"doubling diagonal/product", diagonal_joining(dbl), product_joining(dbl, dbl)},
      {"cyclic graph/product", graph_joining_rotation(cyc, h), product_joining(cyc, cyc)},
      {"common-factor relindep/product", cf.relindep, cf.product}};

  Report report{"certificates", {}};
  std::uint64_t tag = 0;
  for (const auto& [label, lambda, reference] : pairs) {
    const auto la = empirical_law(*lambda, spec, N, derive_seed(config.seed, ++tag));
    const auto lb = empirical_law(*reference, spec, N, derive_seed(config.seed, ++tag));
    const auto search =
        certificate_search(la, lb, test_functions(lambda->left()->diameter_bound()));
    const auto w = wp_assignment(la, lb, 1.0);
    const auto prov = provenance_of(lb.provenance(), label);
    report.rows.push_back(make_row("certificate_search_best", label, search.best.value,
                                   search.best.standard_error, 0.0,
                                   k * search.best.standard_error, kInf,
                                   search.best.observable + " separates", prov));
    const double se = combined(search.best.standard_error, w.standard_error);
    report.rows.push_back(make_row("kr_minus_w1", label, search.best.value - w.value, se, 0.0,
                                   -kInf, k * se, "KR <= W1 on the same samples", prov));
  }
  return report;
}

using Runner = Report (*)(const ExperimentConfig&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> table{
      {"bernoulli-nondec", bernoulli_nondec}, {"doubling-variance", doubling_variance},
      {"doubling-rate", doubling_rate},       {"markov-rate", markov_rate},
      {"rotation-blind", rotation_blind},     {"rotation-graph", rotation_graph},
      {"anchored-low", anchored_low},         {"common-factor", common_factor},
      {"certificates", certificates}};
  return table;
}

}  // namespace

bool Report::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

json to_json(const Report& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"check", r.check},
                    {"parameter", r.parameter},
                    {"estimate", finite_or_null(r.estimate)},
                    {"standard_error", finite_or_null(r.standard_error)},
                    {"reference", finite_or_null(r.reference)},
                    {"lower", finite_or_null(r.lower)},
                    {"upper", finite_or_null(r.upper)},
                    {"pass", r.pass},
                    {"reference_source", r.reference_source},
                    {"provenance",
                     {{"seed", r.provenance.seed},
                      {"samples", r.provenance.samples},
                      {"tail_bound_x", r.provenance.tail_bound_x},
                      {"tail_bound_y", r.provenance.tail_bound_y},
                      {"laws", r.provenance.laws}}}});
  }
  return {{"experiment", report.experiment}, {"all_pass", report.all_pass()}, {"rows", rows}};
}

void write_csv(const Report& report, std::ostream& out) {
  out << "experiment,check,parameter,estimate,standard_error,reference,lower,upper,pass,"
         "reference_source,seed,samples,tail_bound_x,tail_bound_y,laws\n";
  for (const auto& r : report.rows) {
    out << csv_field(report.experiment) << ',' << csv_field(r.check) << ','
        << csv_field(r.parameter) << ',' << fmt(r.estimate) << ',' << fmt(r.standard_error)
        << ',' << fmt(r.reference) << ',' << fmt(r.lower) << ',' << fmt(r.upper) << ','
        << (r.pass ? "true" : "false") << ',' << csv_field(r.reference_source) << ','
        << r.provenance.seed << ',' << r.provenance.samples << ','
        << fmt(r.provenance.tail_bound_x) << ',' << fmt(r.provenance.tail_bound_y) << ','
        << csv_field(r.provenance.laws) << '\n';
  }
}

void write_text(const Report& report, std::ostream& out) {
  for (const auto& r : report.rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s  %-18s %-34s %-34s est=%-12.6g se=%-10.3g band=[%.6g, %.6g]\n",
                  r.pass ? "PASS" : "FAIL", report.experiment.c_str(), r.check.c_str(),
                  r.parameter.c_str(), r.estimate, r.standard_error, r.lower, r.upper);
    out << buf;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  Stream child = Stream(seed).split(tag);
  return child();
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, runner] : registry()) v.push_back(id);
    return v;
  }();
  return ids;
}

ExperimentConfig parse_config(const json& doc) {
  try {
    expect_keys(doc,
                {"experiment", "seed", "samples", "se_multiplier", "params", "systems", "system",
                 "family", "grid", "p", "expect", "assignment_cap"},
                "config");
    ExperimentConfig config;
    require(doc.contains("seed"), "config: 'seed' is required");
    require(doc.at("seed").is_number_unsigned() || doc.at("seed").is_number_integer(),
            "config: 'seed' must be a non-negative integer");
    require(!doc.at("seed").is_number_integer() || doc.at("seed").get<std::int64_t>() >= 0,
            "config: 'seed' must be a non-negative integer");
    config.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("experiment")) config.experiment = doc.at("experiment").get<std::string>();
    if (doc.contains("samples")) {
      require(doc.at("samples").is_number_integer() && doc.at("samples").get<std::int64_t>() >= 2,
              "config: 'samples' must be an integer >= 2");
      config.samples = doc.at("samples").get<std::size_t>();
    }
    if (doc.contains("se_multiplier")) {
      config.se_multiplier = doc.at("se_multiplier").get<double>();
      require(config.se_multiplier > 0.0, "config: 'se_multiplier' must be positive");
    }
    if (doc.contains("params")) {
      require(doc.at("params").is_object(), "config: 'params' must be an object");
      config.params = doc.at("params");
    }
    config.document = doc;
    return config;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("config: cannot parse " + path + ": " + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig default_config(const std::string& prop_id) {
  const auto& ids = experiment_ids();
  require(std::find(ids.begin(), ids.end(), prop_id) != ids.end(),
          "unknown experiment id '" + prop_id + "'");
  ExperimentConfig config;
  config.experiment = prop_id;
  config.seed = 20260101;
  return config;
}

SystemHandle system_from_json(const json& desc) {
  try {
    require(desc.is_object() && desc.contains("kind"), "system: 'kind' is required");
    const auto kind = desc.at("kind").get<std::string>();
    if (kind == "circle") {
      expect_keys(desc, {"kind", "alpha"}, "system circle");
      return circle_rotation(desc.value("alpha", kGoldenAngle));
    }
    if (kind == "doubling") {
      expect_keys(desc, {"kind"}, "system doubling");
      return doubling_map();
    }
    if (kind == "bernoulli") {
      expect_keys(desc, {"kind", "K"}, "system bernoulli");
      return bernoulli_shift(desc.value("K", 24));
    }
    if (kind == "markov") {
      expect_keys(desc, {"kind", "P", "beta", "eta", "L"}, "system markov");
      return markov_shift(matrix_from_json(desc.at("P")), desc.value("beta", 0.5),
                          desc.value("eta", 0.5), desc.value("L", 48));
    }
    if (kind == "cyclic") {
      expect_keys(desc, {"kind", "q", "g"}, "system cyclic");
      return cyclic_rotation(desc.at("q").get<int>(), desc.value("g", 1));
    }
    if (kind == "product") {
      expect_keys(desc, {"kind", "factor", "fiber"}, "system product");
      return product_system(system_from_json(desc.at("factor")),
                            system_from_json(desc.at("fiber")));
    }
    throw InvalidArgument("system: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("system: ") + e.what());
  }
}

JoiningHandle joining_from_json(const json& desc, const SystemHandle& x, const SystemHandle& y) {
  try {
    require(desc.is_object() && desc.contains("kind"), "joining: 'kind' is required");
    const auto kind = desc.at("kind").get<std::string>();
    if (kind == "product") {
      expect_keys(desc, {"kind"}, "joining product");
      return product_joining(x, y);
    }
    if (kind == "diagonal") {
      expect_keys(desc, {"kind"}, "joining diagonal");
      return diagonal_joining(x, y);
    }
    if (kind == "graph") {
      expect_keys(desc, {"kind", "h"}, "joining graph");
      require(x->id() == y->id(), "joining graph: systems must coincide");
      return graph_joining_rotation(x, desc.at("h").get<double>());
    }
    if (kind == "relindep") {
      expect_keys(desc, {"kind"}, "joining relindep");
      auto px = std::dynamic_pointer_cast<const ProductSystem>(x);
      auto py = std::dynamic_pointer_cast<const ProductSystem>(y);
      require(px && py, "joining relindep: both systems must be products");
      require(px->factor()->id() == py->factor()->id(),
              "joining relindep: systems must share the factor");
      return relindep_joining(px->factor(), px->fiber(), py->fiber());
    }
    if (kind == "mixture") {
      expect_keys(desc, {"kind", "components", "weights"}, "joining mixture");
      std::vector<JoiningHandle> components;
      for (const auto& c : desc.at("components")) components.push_back(joining_from_json(c, x, y));
      const auto& weights = desc.at("weights");
      require(weights.is_array() && !weights.empty(), "joining mixture: weights required");
      if (std::all_of(weights.begin(), weights.end(), [](const json& w) { return w.is_string(); })) {
        std::vector<Rational> exact;
        for (const auto& w : weights) exact.push_back(parse_rational(w.get<std::string>()));
        return convex_mixture(std::move(components), std::move(exact));
      }
      return convex_mixture(std::move(components), weights.get<std::vector<double>>());
    }
    throw InvalidArgument("joining: unknown kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("joining: ") + e.what());
  }
}

Report run_reproduce(const std::string& prop_id, const ExperimentConfig& config) {
  for (const auto& [id, runner] : registry()) {
    if (id != prop_id) continue;
    require(config.experiment.empty() || config.experiment == prop_id,
            "config is for experiment '" + config.experiment + "', not '" + prop_id + "'");
    ExperimentConfig effective = config;
    effective.experiment = prop_id;
    return runner(effective);
  }
  throw InvalidArgument("unknown experiment id '" + prop_id + "'");
}

Report run_depbound(const ExperimentConfig& config) {
  try {
    const auto& doc = config.document;
    SystemHandle x, y;
    if (doc.contains("system")) {
      x = y = system_from_json(doc.at("system"));
    } else {
      require(doc.contains("systems"), "depbound: 'systems' or 'system' is required");
      expect_keys(doc.at("systems"), {"x", "y"}, "depbound systems");
      x = system_from_json(doc.at("systems").at("x"));
      y = system_from_json(doc.at("systems").at("y"));
    }
    require(doc.contains("family") && doc.at("family").is_array() && !doc.at("family").empty(),
            "depbound: 'family' must be a non-empty array");
    std::vector<JoiningHandle> family;
    for (const auto& d : doc.at("family")) family.push_back(joining_from_json(d, x, y));
    require(doc.contains("grid") && doc.at("grid").is_array() && !doc.at("grid").empty(),
            "depbound: 'grid' must be a non-empty array");
    std::vector<ArraySpec> grid;
    for (const auto& g : doc.at("grid")) {
      expect_keys(g, {"n", "m", "R"}, "depbound grid entry");
      ArraySpec spec{g.value("n", std::size_t{1}), g.value("m", std::size_t{1}),
                     g.value("R", std::size_t{0})};
      spec.validate();
      grid.push_back(spec);
    }
    std::vector<double> orders{1.0};
    if (doc.contains("p")) {
      orders = doc.at("p").is_array() ? doc.at("p").get<std::vector<double>>()
                                      : std::vector<double>{doc.at("p").get<double>()};
    }
    for (double p : orders) require(p >= 1.0, "depbound: p must be >= 1");
    const std::string expect = doc.value("expect", std::string("none"));
    require(expect == "none" || expect == "zero" || expect == "positive",
            "depbound: 'expect' must be none, zero or positive");
    const std::size_t cap = doc.value("assignment_cap", kDefaultAssignmentCap);
    const std::size_t N = samples_or(config, 500);
    const double k = config.se_multiplier;

    Report report{"depbound", {}};
    std::uint64_t tag = 0;
    for (const auto& spec : grid) {
      for (double p : orders) {
        const auto dep = dep_lower_bound(family, spec, p, N, derive_seed(config.seed, ++tag), cap);
        char param[96];
        std::snprintf(param, sizeof param, "n=%zu m=%zu R=%zu p=%g", spec.n, spec.m, spec.R, p);
        RowProvenance prov{config.seed, N, x->tail_bound(), y->tail_bound(), ""};
        std::size_t best = 0;
        for (std::size_t j = 0; j < dep.per_joining.size(); ++j) {
          const auto& g = dep.per_joining[j];
          if (g.value > dep.per_joining[best].value) best = j;
          prov.laws = dep.family[j] + " vs product";
          report.rows.push_back(make_row("wp_member", std::string(param) + " " + dep.family[j],
                                         g.value, g.standard_error, kNaN, -kInf, kInf,
                                         "plug-in W_p, lower bound for the family", prov));
        }
        const double se = dep.per_joining[best].standard_error;
        double lo = -kInf, hi = kInf;
        if (expect == "zero") {
          lo = 0.0;
          hi = k * se;
        } else if (expect == "positive") {
          lo = k * se;
        }
        prov.laws = "family max";
        report.rows.push_back(make_row("dep_lower_bound", param, dep.value, se, kNaN, lo, hi,
                                       "max over family (expect " + expect + ")", prov));
      }
    }
    return report;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("depbound: ") + e.what());
  }
}

Report run_twin_quotient(const std::string& in_path, const std::string& out_path,
                         std::optional<double> tol) {
  const auto space = read_kernel_space(in_path);
  const double t = tol.value_or(space.default_tolerance());
  require(t >= 0.0, "twin-quotient: tolerance must be >= 0");
  const auto partition = twin_partition(space, t);
  const auto quotient = twin_quotient(space, partition);
  write_kernel_space(quotient, out_path);

  const RowProvenance prov{0, 0, 0.0, 0.0, in_path};
  Report report{"twin-quotient", {}};
  const double atoms_in = static_cast<double>(space.size());
  const double atoms_out = static_cast<double>(quotient.size());
  report.rows.push_back(make_row("atoms_in", "", atoms_in, 0.0, kNaN, atoms_in, atoms_in,
                                 "input", prov));
  report.rows.push_back(make_row("blocks", "tol=" + fmt(t), atoms_out, 0.0, kNaN, 1.0, atoms_in,
                                 "twin partition", prov));
  const double refined = static_cast<double>(twin_partition(quotient, t).blocks.size());
  report.rows.push_back(make_row("quotient_twin_free", "", refined, 0.0, atoms_out, atoms_out,
                                 atoms_out, "quotient blocks are singletons", prov));
  for (std::size_t n = 1; n <= 3; ++n) {
    if (std::pow(atoms_in, static_cast<double>(n)) > 1e6) break;
    const bool equal =
        laws_equal(exact_array_law(space, n), exact_array_law(quotient, n), t, 1e-12);
    report.rows.push_back(make_row("array_law_equal", "n=" + std::to_string(n),
                                   equal ? 1.0 : 0.0, 0.0, 1.0, 1.0, 1.0,
                                   space.exact() ? "exact enumeration" : "enumeration, real masses",
                                   prov));
  }
  return report;
}

}  // namespace joinlab
