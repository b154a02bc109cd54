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

#include "joinlab/kernelspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "joinlab/errors.hpp"
#include "joinlab/parallel.hpp"

namespace joinlab {

using nlohmann::json;

void FiniteKernelSpace::validate() const {
  const std::size_t n = size();
  require(n > 0, "kernel space: no atoms");
  require(marks.size() == n, "kernel space: marks must have one row per atom");
  for (const auto& row : marks) {
    require(row.size() == mark_names.size(), "kernel space: mark row length mismatch");
    for (double v : row) require(std::isfinite(v), "kernel space: non-finite mark");
  }
  require(kernels.size() == color_names.size(), "kernel space: one kernel per color");
  for (const auto& k : kernels) {
    require(k.size() == n * n, "kernel space: kernel matrices must be square of atom count");
    for (double v : k) require(std::isfinite(v), "kernel space: non-finite kernel entry");
  }
  double total = 0.0;
  for (double m : masses) {
    require(m > 0.0 && std::isfinite(m), "kernel space: masses must be positive");
    total += m;
  }
  if (exact_masses) {
    require(exact_masses->size() == n, "kernel space: exact mass count mismatch");
    Rational sum = 0;
    for (const auto& m : *exact_masses) {
      require(m > Rational(0), "kernel space: masses must be positive");
      sum += m;
    }
    require(sum == Rational(1), "kernel space: masses must sum to 1, got " + to_string(sum));
  } else {
    require(std::fabs(total - 1.0) <= 1e-12, "kernel space: masses must sum to 1");
  }
}

namespace {

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

bool are_twins(const FiniteKernelSpace& s, std::size_t z, std::size_t zp, double tol) {
  for (std::size_t a = 0; a < s.mark_names.size(); ++a) {
    if (!close(s.marks[z][a], s.marks[zp][a], tol)) return false;
  }
  for (std::size_t c = 0; c < s.kernels.size(); ++c) {
    for (std::size_t w = 0; w < s.size(); ++w) {
      if (!close(s.kernel(c, z, w), s.kernel(c, zp, w), tol)) return false;
      if (!close(s.kernel(c, w, z), s.kernel(c, w, zp), tol)) return false;
    }
  }
  return true;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

TwinPartition twin_partition(const FiniteKernelSpace& space, double tol) {
  require(tol >= 0.0, "twin_partition: tol must be >= 0");
  space.validate();
  const std::size_t n = space.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t zp = z + 1; zp < n; ++zp) {
      const auto rz = find_root(parent, z), rp = find_root(parent, zp);
      if (rz == rp) continue;
      if (are_twins(space, z, zp, tol)) parent[std::max(rz, rp)] = std::min(rz, rp);
    }
  }
  TwinPartition out;
  out.tolerance = tol;
  std::vector<std::size_t> block_of(n, n);
  for (std::size_t z = 0; z < n; ++z) {
    const auto r = find_root(parent, z);
    if (block_of[r] == n) {
      block_of[r] = out.blocks.size();
      out.blocks.emplace_back();
    }
    out.blocks[block_of[r]].push_back(z);
  }
  return out;
}

FiniteKernelSpace twin_quotient(const FiniteKernelSpace& space, const TwinPartition& partition) {
  space.validate();
  std::vector<bool> seen(space.size(), false);
  for (const auto& block : partition.blocks) {
    require(!block.empty(), "twin_quotient: empty block");
    for (auto z : block) {
      require(z < space.size() && !seen[z], "twin_quotient: blocks must partition the atoms");
      seen[z] = true;
    }
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
          "twin_quotient: blocks must cover the atoms");

  std::vector<std::size_t> reps;
  for (const auto& block : partition.blocks) {
    const auto rep = *std::min_element(block.begin(), block.end());
    for (auto z : block) {
      if (!are_twins(space, rep, z, partition.tolerance)) {
        std::ostringstream msg;
        msg << "twin_quotient: atoms " << rep << " and " << z
            << " share a block but disagree beyond tol=" << partition.tolerance;
        throw ToleranceInconsistency(msg.str());
      }
    }
    reps.push_back(rep);
  }

  FiniteKernelSpace out;
  out.mark_names = space.mark_names;
  out.color_names = space.color_names;
  const std::size_t q = reps.size();
  if (space.exact()) out.exact_masses.emplace();
  for (std::size_t b = 0; b < q; ++b) {
    double mass = 0.0;
    Rational exact_mass = 0;
    for (auto z : partition.blocks[b]) {
      mass += space.masses[z];
      if (space.exact()) exact_mass += (*space.exact_masses)[z];
    }
    if (space.exact()) {
      out.exact_masses->push_back(exact_mass);
      mass = to_double(exact_mass);
    }
    out.masses.push_back(mass);
    out.marks.push_back(space.marks[reps[b]]);
  }
  for (std::size_t c = 0; c < space.kernels.size(); ++c) {
    std::vector<double> k(q * q);
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) k[i * q + j] = space.kernel(c, reps[i], reps[j]);
    out.kernels.push_back(std::move(k));
  }
  return out;
}

FiniteKernelSpace twin_quotient(const FiniteKernelSpace& space, double tol) {
  return twin_quotient(space, twin_partition(space, tol));
}

KernelArrayLaw exact_array_law(const FiniteKernelSpace& space, std::size_t n,
                               const ArrayLawSelection& selection, std::size_t cap) {
  space.validate();
  require(n >= 1, "exact_array_law: n must be >= 1");
  const std::size_t atoms = space.size();
  const double tuples = std::pow(static_cast<double>(atoms), static_cast<double>(n));
  if (tuples > static_cast<double>(cap)) {
    throw CapExceeded("exact_array_law: atom count^n exceeds the enumeration cap");
  }
  std::vector<std::size_t> marks, colors;
  if (selection.marks) {
    marks = *selection.marks;
  } else {
    marks.resize(space.mark_names.size());
    std::iota(marks.begin(), marks.end(), 0);
  }
  if (selection.colors) {
    colors = *selection.colors;
  } else {
    colors.resize(space.color_names.size());
    std::iota(colors.begin(), colors.end(), 0);
  }
  for (auto a : marks) require(a < space.mark_names.size(), "exact_array_law: mark index");
  for (auto c : colors) require(c < space.color_names.size(), "exact_array_law: color index");

  const bool exact = space.exact();
  struct Partial {
    std::map<std::vector<double>, double> atoms;
    std::map<std::vector<double>, Rational> exact_atoms;
  };
  std::vector<Partial> partials(atoms);
  const std::size_t key_len = n * marks.size() + colors.size() * n * (n - 1);

  parallel_for(atoms, [&](std::size_t lead) {
    auto& out = partials[lead];
    std::vector<std::size_t> idx(n, 0);
    idx[0] = lead;
    std::vector<double> key(key_len);
    while (true) {
      double mass = 1.0;
      Rational exact_mass = 1;
      for (auto z : idx) {
        if (exact) {
          exact_mass *= (*space.exact_masses)[z];
        } else {
          mass *= space.masses[z];
        }
      }
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (auto a : marks) key[pos++] = space.marks[idx[i]][a];
      for (auto c : colors)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            if (i != j) key[pos++] = space.kernel(c, idx[i], idx[j]);
      if (exact) {
        out.exact_atoms[key] += exact_mass;
      } else {
        out.atoms[key] += mass;
      }
      std::size_t p = n;
      while (p > 1 && ++idx[p - 1] == atoms) idx[--p] = 0;
      if (p <= 1) break;
    }
  });

  KernelArrayLaw law;
  law.n = n;
  if (exact) {
    law.exact_atoms.emplace();
    for (auto& part : partials)
      for (auto& [key, m] : part.exact_atoms) (*law.exact_atoms)[key] += m;
    for (const auto& [key, m] : *law.exact_atoms) law.atoms[key] = to_double(m);
  } else {
    for (auto& part : partials)
      for (auto& [key, m] : part.atoms) law.atoms[key] += m;
  }
  return law;
}

bool laws_equal(const KernelArrayLaw& a, const KernelArrayLaw& b, double key_tol,
                double mass_tol) {
  if (a.n != b.n || a.atoms.size() != b.atoms.size()) return false;
  auto keys_close = [key_tol](const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) return false;
    for (std::size_t k = 0; k < u.size(); ++k)
      if (!close(u[k], v[k], key_tol)) return false;
    return true;
  };
  if (a.exact_atoms && b.exact_atoms) {
    auto ia = a.exact_atoms->begin();
    for (auto ib = b.exact_atoms->begin(); ib != b.exact_atoms->end(); ++ia, ++ib) {
      if (!keys_close(ia->first, ib->first) || ia->second != ib->second) return false;
    }
    return true;
  }
  auto ia = a.atoms.begin();
  for (auto ib = b.atoms.begin(); ib != b.atoms.end(); ++ia, ++ib) {
    if (!keys_close(ia->first, ib->first) || !close(ia->second, ib->second, mass_tol)) {
      return false;
    }
  }
  return true;
}

namespace {

std::vector<std::size_t> name_map(const std::vector<std::string>& from,
                                  const std::vector<std::string>& to, bool& ok) {
  std::vector<std::size_t> out;
  ok = from.size() == to.size();
  if (!ok) return out;
  for (const auto& name : from) {
    auto it = std::find(to.begin(), to.end(), name);
    if (it == to.end()) {
      ok = false;
      return out;
    }
    out.push_back(static_cast<std::size_t>(it - to.begin()));
  }
  return out;
}

// Mass, marks, and sorted (value, mass) profiles of each row and column.
struct AtomProfile {
  std::vector<double> scalars;
  std::vector<std::vector<std::pair<double, double>>> profiles;
};

AtomProfile profile(const FiniteKernelSpace& s, std::size_t z,
                    const std::vector<std::size_t>& mark_order,
                    const std::vector<std::size_t>& color_order) {
  AtomProfile p;
  for (auto a : mark_order) p.scalars.push_back(s.marks[z][a]);
  for (auto c : color_order) {
    p.scalars.push_back(s.kernel(c, z, z));
    std::vector<std::pair<double, double>> row, col;
    for (std::size_t w = 0; w < s.size(); ++w) {
      row.emplace_back(s.kernel(c, z, w), s.masses[w]);
      col.emplace_back(s.kernel(c, w, z), s.masses[w]);
    }
    std::sort(row.begin(), row.end());
    std::sort(col.begin(), col.end());
    p.profiles.push_back(std::move(row));
    p.profiles.push_back(std::move(col));
  }
  return p;
}

bool profiles_close(const AtomProfile& u, const AtomProfile& v, double tol) {
  for (std::size_t k = 0; k < u.scalars.size(); ++k)
    if (!close(u.scalars[k], v.scalars[k], tol)) return false;
  const double mass_tol = std::max(tol, 1e-12);
  for (std::size_t k = 0; k < u.profiles.size(); ++k) {
    for (std::size_t w = 0; w < u.profiles[k].size(); ++w) {
      if (!close(u.profiles[k][w].first, v.profiles[k][w].first, tol) ||
          !close(u.profiles[k][w].second, v.profiles[k][w].second, mass_tol)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

IsomorphismVerdict kernel_isomorphic(const FiniteKernelSpace& a, const FiniteKernelSpace& b,
                                     double tol, std::size_t cap) {
  require(tol >= 0.0, "kernel_isomorphic: tol must be >= 0");
  a.validate();
  b.validate();
  if (a.size() > cap || b.size() > cap) {
    throw CapExceeded("kernel_isomorphic: atom count exceeds the brute-force cap");
  }
  IsomorphismVerdict verdict;
  if (a.size() != b.size()) {
    verdict.reason = "atom counts differ";
    return verdict;
  }
  bool marks_ok = false, colors_ok = false;
  const auto mark_map = name_map(a.mark_names, b.mark_names, marks_ok);
  const auto color_map = name_map(a.color_names, b.color_names, colors_ok);
  if (!marks_ok || !colors_ok) {
    verdict.reason = "mark or color names differ";
    return verdict;
  }
  std::vector<std::size_t> own_marks(a.mark_names.size()), own_colors(a.color_names.size());
  std::iota(own_marks.begin(), own_marks.end(), 0);
  std::iota(own_colors.begin(), own_colors.end(), 0);

  const std::size_t n = a.size();
  const bool exact = a.exact() && b.exact();
  auto masses_match = [&](std::size_t i, std::size_t j) {
    if (exact) return (*a.exact_masses)[i] == (*b.exact_masses)[j];
    return close(a.masses[i], b.masses[j], std::max(tol, 1e-12));
  };
  std::vector<std::vector<std::size_t>> candidates(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pa = profile(a, i, own_marks, own_colors);
    for (std::size_t j = 0; j < n; ++j) {
      if (masses_match(i, j) && profiles_close(pa, profile(b, j, mark_map, color_map), tol)) {
        candidates[i].push_back(j);
      }
    }
    if (candidates[i].empty()) {
      verdict.reason = "atom " + std::to_string(i) + " has no profile match";
      return verdict;
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return candidates[x].size() < candidates[y].size();
  });

  std::vector<std::size_t> image(n, n);
  std::vector<bool> used(n, false);
  auto consistent = [&](std::size_t depth) {
    const std::size_t i = order[depth];
    for (std::size_t d = 0; d < depth; ++d) {
      const std::size_t k = order[d];
      for (std::size_t c = 0; c < a.kernels.size(); ++c) {
        const std::size_t cb = color_map[c];
        if (!close(a.kernel(c, i, k), b.kernel(cb, image[i], image[k]), tol)) return false;
        if (!close(a.kernel(c, k, i), b.kernel(cb, image[k], image[i]), tol)) return false;
      }
    }
    return true;
  };
  auto search = [&](auto&& self, std::size_t depth) -> bool {
    if (depth == n) return true;
    const std::size_t i = order[depth];
    for (auto j : candidates[i]) {
      if (used[j]) continue;
      image[i] = j;
      used[j] = true;
      if (consistent(depth) && self(self, depth + 1)) return true;
      used[j] = false;
    }
    image[i] = n;
    return false;
  };
  if (search(search, 0)) {
    verdict.isomorphic = true;
    verdict.witness = image;
    verdict.reason = "witness found";
  } else {
    verdict.reason = "no mass-preserving bijection matches marks and kernels";
  }
  return verdict;
}

FiniteKernelSpace joining_to_kernel_space(const Joining& joining, std::size_t cutoff) {
  require(joining.has_finite_support(),
          "joining_to_kernel_space: joining " + joining.id() + " has no finite support");
  const auto support = joining.finite_support();
  const auto& sx = *joining.left();
  const auto& sy = *joining.right();
  const std::size_t n = support.size();
  const std::size_t steps = cutoff + 1;

  std::vector<std::vector<State>> ox(n), oy(n);
  for (std::size_t z = 0; z < n; ++z) {
    State x = support[z].x, y = support[z].y;
    for (std::size_t t = 0; t < steps; ++t) {
      ox[z].push_back(x);
      oy[z].push_back(y);
      x = sx.exact_step(x);
      y = sy.exact_step(y);
    }
  }
  FiniteKernelSpace space;
  space.exact_masses.emplace();
  for (const auto& atom : support) {
    space.exact_masses->push_back(atom.mass);
    space.masses.push_back(to_double(atom.mass));
  }
  space.marks.assign(n, {});
  auto label = [](const char* prefix, std::size_t a, std::size_t b) {
    return std::string(prefix) + "[" + std::to_string(a) + "," + std::to_string(b) + "]";
  };
  for (int side = 0; side < 2; ++side) {
    const auto& sys = side == 0 ? sx : sy;
    const auto& orbits = side == 0 ? ox : oy;
    for (std::size_t a = 0; a < steps; ++a) {
      for (std::size_t b = 0; b < steps; ++b) {
        space.mark_names.push_back(label(side == 0 ? "MX" : "MY", a, b));
        space.color_names.push_back(label(side == 0 ? "KX" : "KY", a, b));
        std::vector<double> k(n * n);
        for (std::size_t z = 0; z < n; ++z) {
          space.marks[z].push_back(to_double(sys.exact_dist(orbits[z][a], orbits[z][b])));
          for (std::size_t w = 0; w < n; ++w) {
            k[z * n + w] = to_double(sys.exact_dist(orbits[z][a], orbits[w][b]));
          }
        }
        space.kernels.push_back(std::move(k));
      }
    }
  }
  space.validate();
  return space;
}

json to_json(const FiniteKernelSpace& space) {
  json doc;
  doc["marks"] = space.mark_names;
  doc["colors"] = space.color_names;
  json atoms = json::array();
  for (std::size_t z = 0; z < space.size(); ++z) {
    json atom;
    if (space.exact()) {
      atom["mass"] = to_string((*space.exact_masses)[z]);
    } else {
      atom["mass"] = space.masses[z];
    }
    atom["marks"] = space.marks[z];
    atoms.push_back(std::move(atom));
  }
  doc["atoms"] = std::move(atoms);
  json kernels = json::array();
  const std::size_t n = space.size();
  for (const auto& k : space.kernels) {
    json matrix = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      matrix.push_back(std::vector<double>(k.begin() + static_cast<std::ptrdiff_t>(i * n),
                                           k.begin() + static_cast<std::ptrdiff_t>((i + 1) * n)));
    }
    kernels.push_back(std::move(matrix));
  }
  doc["kernels"] = std::move(kernels);
  return doc;
}

FiniteKernelSpace kernel_space_from_json(const json& doc) {
  try {
    require(doc.is_object(), "kernel space: document must be an object");
    FiniteKernelSpace space;
    if (doc.contains("marks")) space.mark_names = doc.at("marks").get<std::vector<std::string>>();
    if (doc.contains("colors")) {
      space.color_names = doc.at("colors").get<std::vector<std::string>>();
    }
    const auto& atoms = doc.at("atoms");
    require(atoms.is_array() && !atoms.empty(), "kernel space: atoms must be a non-empty array");
    bool all_exact = true;
    std::vector<Rational> exact;
    for (const auto& atom : atoms) {
      const auto& mass = atom.at("mass");
      if (mass.is_string()) {
        const auto r = parse_rational(mass.get<std::string>());
        exact.push_back(r);
        space.masses.push_back(to_double(r));
      } else {
        all_exact = false;
        space.masses.push_back(mass.get<double>());
      }
      space.marks.push_back(atom.contains("marks") ? atom.at("marks").get<std::vector<double>>()
                                                   : std::vector<double>{});
    }
    if (all_exact) space.exact_masses = std::move(exact);
    const std::size_t n = space.size();
    if (doc.contains("kernels")) {
      for (const auto& matrix : doc.at("kernels")) {
        require(matrix.is_array() && matrix.size() == n, "kernel space: kernel row count");
        std::vector<double> k;
        for (const auto& row : matrix) {
          auto values = row.get<std::vector<double>>();
          require(values.size() == n, "kernel space: kernel column count");
          k.insert(k.end(), values.begin(), values.end());
        }
        space.kernels.push_back(std::move(k));
      }
    }
    space.validate();
    return space;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("kernel space: malformed JSON: ") + e.what());
  }
}

FiniteKernelSpace read_kernel_space(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidArgument("kernel space: cannot parse " + path + ": " + e.what());
  }
  return kernel_space_from_json(doc);
}

void write_kernel_space(const FiniteKernelSpace& space, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write " + path);
  out << to_json(space).dump(2) << '\n';
}

}  // namespace joinlab
