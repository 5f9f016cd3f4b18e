#pragma once

#include <vector>

#include "spectom/geometry.hpp"
#include "spectom/types.hpp"

namespace spectom {

//! Axial wavenumber sqrt(k0^2 - k_perp^2). Evanescent input is an error.
double kz(double k_perp, double k0);

//! Slepian-Pollak degrees-of-freedom estimate round(Lz*(kmax-kmin)/pi).
//! Note: one published parameter table lists 60 where this formula gives 63;
//! the formula value is returned (see README).
int effective_rank(double lz, double kmin, double kmax);

//! True iff (kx, kz0) is reachable by the instrument: some k0 in [kmin,kmax]
//! has sqrt(kx^2+kz0^2) = 2 k0 with kz0 < 0 and kx^2 <= 4 (k0*na)^2.
bool passband_contains(double kx, double kz0, double kmin, double kmax,
                       double na);

//! Gauss-Legendre rule on [-1,1]; cached per node count, thread-safe.
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};
const GaussLegendre& gauss_legendre(int nodes);

inline constexpr int kDefaultQuadratureNodes = 257;

//! One sample of the imaging kernel:
//!   (pk2/(k0^2 na^2)) * Int_Omega exp(-(k'^2+(kx-k')^2)/(k0 na)^2)
//!                      * exp(i z (kz(k') + kz(kx-k'))) / kz(k') dk'
//! with Omega = {k' : |k'| <= k0, |kx-k'| <= k0}, evaluated by Gauss-Legendre
//! after k' = k0 sin(theta) (dk'/kz(k') = dtheta kills the endpoint
//! singularity). Exactly zero when |kx| >= 2 k0 or pk2 == 0.
Complex isam_kernel_point(double k_perp, double z, double k0, double na,
                          double pk2, int nodes = kDefaultQuadratureNodes);

//! Precomputed kernel coefficients, indexed [f][q][m][n], n fastest, so each
//! (f,q) slice maps onto a row-major nk x nz matrix.
struct KernelTable {
  ImagingGeometry geometry;
  int quadrature_nodes = kDefaultQuadratureNodes;
  std::vector<Complex> coefficients;

  std::size_t index(int f, int q, int m, int n) const {
    return ((static_cast<std::size_t>(f) * geometry.nx + q) * geometry.nk + m) *
               geometry.nz +
           n;
  }
  Complex at(int f, int q, int m, int n) const {
    return coefficients[index(f, q, m, n)];
  }
  //! nk x nz block A^q_f.
  Eigen::Map<const CMatrixRM> block(int f, int q) const {
    return {coefficients.data() + index(f, q, 0, 0), geometry.nk, geometry.nz};
  }
};

//! Samples the kernel on the full (f,q,m,n) grid. Entries at (N-q) mod N are
//! mirror copies of q (the integrand is even in kx), and rows beyond the
//! passband support are exact zeros.
KernelTable build_kernel_table(const ImagingGeometry& geometry,
                               int nodes = kDefaultQuadratureNodes);

//! Stacked per-q kernel matrix [A^q_1; ...; A^q_Nf] of size (nf*nk) x nz.
CMatrix stacked_kernel(const KernelTable& table, int q);

}  // namespace spectom
