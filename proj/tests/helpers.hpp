#pragma once

#include <complex>
#include <cstdint>

#include "spectom/forward.hpp"
#include "spectom/geometry.hpp"
#include "spectom/kernel.hpp"
#include "spectom/rng.hpp"
#include "spectom/types.hpp"

namespace testutil {

using namespace spectom;

//! Small valid geometry for fast unit tests.
inline ImagingGeometry tiny_geometry(int nx = 8, int nz = 12, int nk = 10, int nf = 2) {
  ImagingGeometry g;
  g.nx = nx;
  g.nz = nz;
  g.nk = nk;
  g.lx = 20.0;
  g.lz = 15.0;
  g.kmin = 0.7;
  g.kmax = 2.1;
  g.na = 0.5;
  g.focal_planes.clear();
  for (int f = 0; f < nf; ++f)
    g.focal_planes.push_back(15.0 * (f + 1) / (nf + 1));
  return g;
}

inline CMatrix random_cmatrix(SubstreamRng& rng, int rows, int cols) {
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = Complex(rng.normal(), rng.normal());
  return m;
}

inline CVector random_cvector(SubstreamRng& rng, int n) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(rng.normal(), rng.normal());
  return v;
}

inline double rel_err(const Complex& got, const Complex& want) {
  return std::abs(got - want) / std::abs(want);
}

inline DensityStack random_density(SubstreamRng& rng, int ns, int nx, int nz) {
  DensityStack p(ns, nx, nz);
  for (auto& v : p.values) v = Complex(rng.normal(), rng.normal());
  return p;
}

inline MeasurementStack random_measurement(SubstreamRng& rng, int nf, int nx, int nk) {
  MeasurementStack s(nf, nx, nk);
  for (auto& v : s.values) v = Complex(rng.normal(), rng.normal());
  return s;
}

}  // namespace testutil
