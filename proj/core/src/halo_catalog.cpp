#include "lunarkd/halo_catalog.hpp"

#include <algorithm>
#include <cmath>

#include "lunarkd/csv.hpp"

namespace lunarkd {

std::size_t HaloCatalog::size() const {
  std::size_t n = 0;
  for (const HaloFamily& f : families) n += f.states.size();
  return n;
}

const SynodicState& HaloCatalog::state(std::size_t index) const {
  for (const HaloFamily& f : families) {
    if (index < f.states.size()) return f.states[index];
    index -= f.states.size();
  }
  throw ConfigError("halo catalog index out of range");
}

const std::string& HaloCatalog::family_of(std::size_t index) const {
  for (const HaloFamily& f : families) {
    if (index < f.states.size()) return f.name;
    index -= f.states.size();
  }
  throw ConfigError("halo catalog index out of range");
}

HaloCatalog load_halo_catalog(const std::string& path, const Cr3bpSystem& sys) {
  const std::vector<std::string> lines = csv::read_lines(path);
  if (lines.empty()) throw ConfigError(path + ": empty halo catalog (missing header)");
  if (lines.front() != kHaloCatalogHeader) {
    throw ConfigError(path + ": row 1: expected header '" + std::string(kHaloCatalogHeader) + "'");
  }

  HaloCatalog cat;
  std::vector<std::vector<std::size_t>> rows_of;  // source row per state, for diagnostics
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path + ": row " + std::to_string(i + 1);
    const std::vector<std::string> f = csv::split(lines[i]);
    if (f.size() != 7) {
      throw ConfigError(where + ": expected 7 fields, found " + std::to_string(f.size()));
    }
    if (f[0].empty()) throw ConfigError(where + ": empty family label");
    SynodicState km;
    for (int k = 0; k < 3; ++k) {
      km.r(k) = csv::parse_double(f[1 + k], where);
      km.v(k) = csv::parse_double(f[4 + k], where);
    }
    auto it = std::find_if(cat.families.begin(), cat.families.end(),
                           [&](const HaloFamily& h) { return h.name == f[0]; });
    if (it == cat.families.end()) {
      cat.families.push_back({f[0], {}, 0.0});
      rows_of.emplace_back();
      it = cat.families.end() - 1;
    }
    it->states.push_back(nondimensionalize(km, sys));
    rows_of[static_cast<std::size_t>(it - cat.families.begin())].push_back(i + 1);
  }
  if (cat.families.empty()) throw ConfigError(path + ": halo catalog has no states");

  for (std::size_t fi = 0; fi < cat.families.size(); ++fi) {
    HaloFamily& fam = cat.families[fi];
    std::vector<double> c;
    c.reserve(fam.states.size());
    for (const SynodicState& s : fam.states) c.push_back(jacobi_constant(s, sys));
    std::vector<double> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    fam.median_jacobi = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (std::abs(c[k] - fam.median_jacobi) > kJacobiTolerance) {
        throw ConfigError(path + ": row " + std::to_string(rows_of[fi][k]) + ": Jacobi constant " +
                          csv::format(c[k]) + " departs from family " + fam.name + " median " +
                          csv::format(fam.median_jacobi));
      }
    }
  }
  return cat;
}

void write_halo_catalog(const HaloCatalog& catalog, const std::string& path, const Cr3bpSystem& sys) {
  csv::Writer w(path, csv::split(kHaloCatalogHeader));
  for (const HaloFamily& f : catalog.families) {
    for (const SynodicState& s : f.states) {
      const SynodicState km = dimensionalize(s, sys);
      w.row(f.name, {km.r.x(), km.r.y(), km.r.z(), km.v.x(), km.v.y(), km.v.z()});
    }
  }
  w.close();
}

}  // namespace lunarkd
