#pragma once

#include <vector>

#include "spectom/kernel.hpp"
#include "spectom/spectra.hpp"
#include "spectom/types.hpp"

namespace spectom {

//! Per-species densities in the transverse-DFT domain, indexed [s][q][n]
//! (n fastest). The same container carries the spatial-domain samples
//! [s][j][n] before/after the transverse DFT helpers below.
struct DensityStack {
  int ns = 0, nx = 0, nz = 0;
  std::vector<Complex> values;

  DensityStack() = default;
  DensityStack(int ns_, int nx_, int nz_)
      : ns(ns_), nx(nx_), nz(nz_),
        values(static_cast<std::size_t>(ns_) * nx_ * nz_, Complex(0, 0)) {}

  std::size_t index(int s, int q, int n) const {
    return (static_cast<std::size_t>(s) * nx + q) * nz + n;
  }
  Complex& at(int s, int q, int n) { return values[index(s, q, n)]; }
  Complex at(int s, int q, int n) const { return values[index(s, q, n)]; }
  //! nz-vector for one (species, transverse index).
  Eigen::Map<const CVector> column(int s, int q) const {
    return {values.data() + index(s, q, 0), nz};
  }
  Eigen::Map<CVector> column(int s, int q) {
    return {values.data() + index(s, q, 0), nz};
  }
};

//! Per-focal-plane data in the transverse-DFT domain, indexed [f][q][m]
//! (m fastest).
struct MeasurementStack {
  int nf = 0, nx = 0, nk = 0;
  std::vector<Complex> values;

  MeasurementStack() = default;
  MeasurementStack(int nf_, int nx_, int nk_)
      : nf(nf_), nx(nx_), nk(nk_),
        values(static_cast<std::size_t>(nf_) * nx_ * nk_, Complex(0, 0)) {}

  std::size_t index(int f, int q, int m) const {
    return (static_cast<std::size_t>(f) * nx + q) * nk + m;
  }
  Complex& at(int f, int q, int m) { return values[index(f, q, m)]; }
  Complex at(int f, int q, int m) const { return values[index(f, q, m)]; }
  Eigen::Map<const CVector> column(int f, int q) const {
    return {values.data() + index(f, q, 0), nk};
  }
  Eigen::Map<CVector> column(int f, int q) {
    return {values.data() + index(f, q, 0), nk};
  }
};

//! Spatial-domain scan samples, indexed [f][x-index][m] (m fastest).
struct ScanData {
  int nf = 0, nx = 0, nk = 0;
  std::vector<Complex> values;

  ScanData() = default;
  ScanData(int nf_, int nx_, int nk_)
      : nf(nf_), nx(nx_), nk(nk_),
        values(static_cast<std::size_t>(nf_) * nx_ * nk_, Complex(0, 0)) {}

  std::size_t index(int f, int j, int m) const {
    return (static_cast<std::size_t>(f) * nx + j) * nk + m;
  }
  Complex& at(int f, int j, int m) { return values[index(f, j, m)]; }
  Complex at(int f, int j, int m) const { return values[index(f, j, m)]; }
};

//! Row-wise Kronecker product: row i of the result is A[i,:] (x) B[i,:].
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

//! y^q_f = sum_s diag(h_s) A^q_f p^q_s for every (f, q).
MeasurementStack apply_forward(const DensityStack& p, const SpectraMatrix& h,
                               const KernelTable& table);

//! w^q_s = sum_f (A^q_f)^H diag(h_s)^H y^q_f; exact adjoint of apply_forward
//! under <a,b> = sum conj(a_i) b_i.
DensityStack apply_adjoint(const MeasurementStack& s, const SpectraMatrix& h,
                           const KernelTable& table);

//! Dense block Phi^q of size (nf*nk) x (ns*nz); equals the row-wise Kronecker
//! construction (1_nf (x) H) khatri-rao with the stacked kernel. For audits
//! and SVD studies only.
CMatrix assemble_block(int q, const SpectraMatrix& h, const KernelTable& table);

//! One transverse-frequency block as a matrix-free operator.
struct BlockSystem {
  const SpectraMatrix& h;
  const KernelTable& table;
  int q;

  Eigen::Index rows() const {
    return static_cast<Eigen::Index>(table.geometry.nf()) * table.geometry.nk;
  }
  Eigen::Index cols() const {
    return static_cast<Eigen::Index>(h.cols()) * table.geometry.nz;
  }
  //! x is the stacked [p_1; ...; p_ns] of length ns*nz.
  CVector apply(const CVector& x) const;
  CVector adjoint(const CVector& y) const;
  CMatrix assemble() const { return assemble_block(q, h, table); }
};

//! Unnormalized forward DFT over the scan index (inverse divides by nx).
MeasurementStack measurements_to_fourier(const ScanData& spatial);
ScanData measurements_to_spatial(const MeasurementStack& fourier);

//! Same transverse DFT pair for density stacks ([s][j][n] <-> [s][q][n]).
DensityStack density_to_fourier(const DensityStack& spatial);
DensityStack density_to_spatial(const DensityStack& fourier);

Complex dot(const DensityStack& a, const DensityStack& b);
Complex dot(const MeasurementStack& a, const MeasurementStack& b);
double norm(const DensityStack& a);
double norm(const MeasurementStack& a);

}  // namespace spectom
