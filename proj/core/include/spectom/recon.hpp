#pragma once

#include <cstdint>
#include <vector>

#include "spectom/forward.hpp"
#include "spectom/types.hpp"
#include "spectom/uniqueness.hpp"

namespace spectom {

enum class Regularizer { tikhonov, l1, group_l21 };

struct ReconConfig {
  Regularizer regularizer = Regularizer::tikhonov;
  double lambda_r = 1e-5;
  int max_iters = 300;
  double cg_tol = 1e-8;     //!< relative normal-equations gradient stop
  int power_iters = 40;     //!< power-iteration count for the FISTA step
  std::uint64_t seed = 0;   //!< power-iteration start vector stream

  void validate() const;
};

//! Solver output. `densities` stays in the transverse-DFT domain.
//! `objective_trace` semantics per solver: the conjugate-gradient quadratic
//! 1/2||r||^2 + (lambda/2)||p||^2 for solve_tikhonov (non-increasing), the
//! full penalized objective for solve_fista.
struct ReconResult {
  DensityStack densities;
  std::vector<double> objective_trace;
  double residual_norm = 0.0;
  int iterations_run = 0;
};

//! Penalized weighted-least-squares objective
//!   1/2 sum_q ||s^q - Phi^q p^q||^2 + lambda_r R(P)
//! with R = sum_s ||p_s||^2 (tikhonov), sum_s ||p_s||_1 (l1),
//! sum_s ||p_s||_2 (group_l21), measured on the stored stack.
double objective(const DensityStack& p, const MeasurementStack& s,
                 const SpectraMatrix& h, const KernelTable& table,
                 const ReconConfig& config);

//! Squared spectral norm estimate ||Phi||^2 by power iteration.
double operator_norm_sq(const SpectraMatrix& h, const KernelTable& table,
                        int power_iters, std::uint64_t seed);

//! Per-block conjugate gradient on the regularized normal equations
//!   (Phi^q^H Phi^q + lambda_r I) p^q = Phi^q^H s^q.
ReconResult solve_tikhonov(const MeasurementStack& s, const SpectraMatrix& h,
                           const KernelTable& table, const ReconConfig& config);

//! Accelerated proximal gradient with function-value restart; prox is the
//! complex soft threshold (l1) or the per-species block soft threshold
//! (group_l21), threshold lambda_r * step.
ReconResult solve_fista(const MeasurementStack& s, const SpectraMatrix& h,
                        const KernelTable& table, const ReconConfig& config);

//! Orthogonal projection of each per-q density column onto the passband
//! subspace: p^q_s <- V^q V^q^H p^q_s.
DensityStack project_passband(const DensityStack& p,
                              const std::vector<PassbandBasis>& bases);

}  // namespace spectom
