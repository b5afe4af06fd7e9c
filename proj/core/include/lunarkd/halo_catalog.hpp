#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lunarkd/cr3bp.hpp"

namespace lunarkd {

/// States sampled along one periodic orbit, nondimensional.
struct HaloFamily {
  std::string name;  // resonance label, e.g. "9:2"
  std::vector<SynodicState> states;
  double median_jacobi = 0.0;
};

struct HaloCatalog {
  std::vector<HaloFamily> families;

  std::size_t size() const;
  /// Flat indexing across families in file order.
  const SynodicState& state(std::size_t index) const;
  const std::string& family_of(std::size_t index) const;
};

/// Family members must share the Jacobi constant within this tolerance of
/// the family median.
inline constexpr double kJacobiTolerance = 1e-6;

inline constexpr const char* kHaloCatalogHeader = "family,x_km,y_km,z_km,vx_kmps,vy_kmps,vz_kmps";

/// Reads a catalog CSV (km, km/s). Errors name the offending row (1-based,
/// counting the header as row 1).
HaloCatalog load_halo_catalog(const std::string& path, const Cr3bpSystem& sys);

void write_halo_catalog(const HaloCatalog& catalog, const std::string& path, const Cr3bpSystem& sys);

}  // namespace lunarkd
