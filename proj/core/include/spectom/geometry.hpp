#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectom/types.hpp"

namespace spectom {

//! DFT index -> angular spatial frequency: 2*pi*q/L for q < N/2, else
//! 2*pi*(q-N)/L. N must be even.
double dft_to_ft(int q, int n, double length);

//! Scan/object grids, wavenumber band, aperture and focal planes.
//! Lengths in micrometers, wavenumbers in rad/um.
struct ImagingGeometry {
  int nx = 0;  // transverse samples (even)
  int nz = 0;  // axial samples
  int nk = 0;  // wavenumber samples (>= 2)
  double lx = 0.0;
  double lz = 0.0;
  double kmin = 0.0;
  double kmax = 0.0;
  double na = 0.0;  // numerical aperture, in (0,1)
  std::vector<double> focal_planes;   // size nf(), values in [0, lz]
  std::vector<double> power_spectrum; // |P(k0)|^2 per wavenumber; empty = flat 1

  int nf() const { return static_cast<int>(focal_planes.size()); }
  double dx() const { return lx / nx; }
  double dz() const { return lz / nz; }
  double dk() const { return (kmax - kmin) / (nk - 1); }
  double wavenumber(int m) const { return kmin + m * dk(); }
  double kx(int q) const { return dft_to_ft(q, nx, lx); }
  double z(int n) const { return n * dz(); }
  double pk2(int m) const {
    return power_spectrum.empty() ? 1.0 : power_spectrum[m];
  }

  //! Throws ConfigError on hard violations; returns soft warnings
  //! (currently the transverse sampling rule dx < pi/(kmax*sin(na))).
  std::vector<std::string> validate() const;

  //! Stable content hash over all fields; keys kernel-table caches.
  std::uint64_t hash() const;
};

//! FNV-1a 64-bit over a byte buffer (also used for manifest checksums).
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t seed = 14695981039346656037ull);

}  // namespace spectom
