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

// Python bindings. Structured values cross the boundary as JSON text; the
// package wrapper decodes them.

#include <optional>
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "joinlab/analytics.hpp"
#include "joinlab/errors.hpp"
#include "joinlab/experiments.hpp"
#include "joinlab/kernelspace.hpp"
#include "joinlab/transport.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

joinlab::ExperimentConfig config_from(const std::optional<std::string>& text,
                                      const std::string& prop_id) {
  if (!text) return joinlab::default_config(prop_id);
  try {
    return joinlab::parse_config(json::parse(*text));
  } catch (const json::exception& e) {
    throw joinlab::InvalidArgument(std::string("config: ") + e.what());
  }
}

joinlab::FiniteKernelSpace space_from(const std::string& text) {
  try {
    return joinlab::kernel_space_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw joinlab::InvalidArgument(std::string("kernel space: ") + e.what());
  }
}

using Rows = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> rows_of(const Rows& a, std::size_t& dim) {
  if (a.ndim() == 1) {
    dim = 1;
  } else if (a.ndim() == 2) {
    dim = static_cast<std::size_t>(a.shape(1));
  } else {
    throw joinlab::InvalidArgument("wp_assignment: expected a 1-D or 2-D array");
  }
  return {a.data(), static_cast<std::size_t>(a.size())};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Distance-array joining laboratory: experiments, transport and kernel spaces.";

  py::register_exception<joinlab::CapExceeded>(m, "CapExceeded", PyExc_ValueError);
  py::register_exception<joinlab::ToleranceInconsistency>(m, "ToleranceInconsistency",
                                                          PyExc_RuntimeError);

  m.def("experiment_ids", &joinlab::experiment_ids);

  m.def("constants_json", [] { return joinlab::constants_table().dump(); });

  m.def(
      "reproduce_json",
      [](const std::string& prop_id, std::optional<std::string> config) {
        const auto c = config_from(config, prop_id);
        py::gil_scoped_release release;
        return joinlab::to_json(joinlab::run_reproduce(prop_id, c)).dump();
      },
      py::arg("prop_id"), py::arg("config") = py::none());

  m.def(
      "depbound_json",
      [](const std::string& config) {
        const auto c = config_from(config, "");
        py::gil_scoped_release release;
        return joinlab::to_json(joinlab::run_depbound(c)).dump();
      },
      py::arg("config"));

  m.def(
      "twin_quotient_json",
      [](const std::string& space, std::optional<double> tol) {
        const auto s = space_from(space);
        return joinlab::to_json(joinlab::twin_quotient(s, tol.value_or(s.default_tolerance())))
            .dump();
      },
      py::arg("space"), py::arg("tol") = py::none());

  m.def(
      "twin_blocks",
      [](const std::string& space, std::optional<double> tol) {
        const auto s = space_from(space);
        return joinlab::twin_partition(s, tol.value_or(s.default_tolerance())).blocks;
      },
      py::arg("space"), py::arg("tol") = py::none());

  m.def(
      "array_laws_equal",
      [](const std::string& a, const std::string& b, std::size_t n) {
        return joinlab::laws_equal(joinlab::exact_array_law(space_from(a), n),
                                   joinlab::exact_array_law(space_from(b), n));
      },
      py::arg("a"), py::arg("b"), py::arg("n"));

  m.def(
      "kernel_isomorphic",
      [](const std::string& a, const std::string& b, double tol) {
        const auto v = joinlab::kernel_isomorphic(space_from(a), space_from(b), tol);
        return py::make_tuple(v.isomorphic, v.witness, v.reason);
      },
      py::arg("a"), py::arg("b"), py::arg("tol") = 0.0);

  m.def(
      "wp_assignment",
      [](const Rows& a, const Rows& b, double p) {
        std::size_t da = 0, db = 0;
        const auto ra = rows_of(a, da);
        const auto rb = rows_of(b, db);
        if (da != db) throw joinlab::InvalidArgument("wp_assignment: dimension mismatch");
        const auto g = joinlab::wp_assignment(ra, rb, da, p);
        return py::make_tuple(g.value, g.standard_error);
      },
      py::arg("a"), py::arg("b"), py::arg("p") = 1.0);

  m.def(
      "markov_spectrum",
      [](const joinlab::Matrix& p) {
        const auto s = joinlab::markov_spectrum(p);
        py::dict out;
        out["stationary"] = s.stationary;
        out["theta"] = s.theta;
        out["v_h"] = s.v_h;
        out["sigma_h2_series"] = s.sigma_h2_series;
        out["sigma_h2_spectral"] = s.sigma_h2_spectral;
        out["abs_diff_limit"] = joinlab::markov_abs_diff_limit(s);
        return out;
      },
      py::arg("transition"));
}
