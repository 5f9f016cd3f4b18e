#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "spectom/recon.hpp"

using namespace spectom;
using testutil::random_cmatrix;
using testutil::random_density;
using testutil::random_measurement;
using testutil::tiny_geometry;

namespace {

struct Fixture {
  ImagingGeometry g;
  KernelTable table;
  SpectraMatrix h;

  Fixture(int nx = 4, int nz = 8, int nk = 8, int nf = 2, int ns = 2)
      : g(tiny_geometry(nx, nz, nk, nf)), table(build_kernel_table(g)) {
    SubstreamRng rng(3, "recon-spectra");
    h = random_cmatrix(rng, g.nk, ns);
  }
};

//! Dense reference: solve every regularized normal-equation block exactly.
DensityStack dense_tikhonov(const MeasurementStack& s, const SpectraMatrix& h,
                            const KernelTable& table, double lambda) {
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  DensityStack p(ns, g.nx, g.nz);
  for (int q = 0; q < g.nx; ++q) {
    CMatrix phi = assemble_block(q, h, table);
    CMatrix normal = phi.adjoint() * phi +
                     lambda * CMatrix::Identity(phi.cols(), phi.cols());
    CVector rhs(phi.cols());
    CVector sq(phi.rows());
    for (int f = 0; f < g.nf(); ++f) sq.segment(f * g.nk, g.nk) = s.column(f, q);
    rhs = phi.adjoint() * sq;
    CVector x = Eigen::LDLT<CMatrix>(normal).solve(rhs);
    for (int sp = 0; sp < ns; ++sp)
      for (int n = 0; n < g.nz; ++n) p.at(sp, q, n) = x[sp * g.nz + n];
  }
  return p;
}

double stack_rel_err(const DensityStack& got, const DensityStack& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.values.size(); ++i) {
    num += std::norm(got.values[i] - want.values[i]);
    den += std::norm(want.values[i]);
  }
  return std::sqrt(num / den);
}

//! Plain unaccelerated proximal gradient, as an independent slow reference.
DensityStack ista_reference(const MeasurementStack& s, const SpectraMatrix& h,
                            const KernelTable& table, double lambda,
                            Regularizer reg, int iters) {
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  double lip = 1.05 * operator_norm_sq(h, table, 60, 1);
  double step = 1.0 / lip;
  DensityStack p(ns, g.nx, g.nz);
  for (int it = 0; it < iters; ++it) {
    MeasurementStack r = apply_forward(p, h, table);
    for (std::size_t i = 0; i < r.values.size(); ++i)
      r.values[i] -= s.values[i];
    DensityStack grad = apply_adjoint(r, h, table);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      p.values[i] -= step * grad.values[i];
    double tau = lambda * step;
    if (reg == Regularizer::l1) {
      for (auto& v : p.values) {
        double mag = std::abs(v);
        v = mag > tau ? v * ((mag - tau) / mag) : Complex(0, 0);
      }
    } else if (reg == Regularizer::group_l21) {
      for (int sp = 0; sp < ns; ++sp) {
        double nrm = 0.0;
        for (int q = 0; q < g.nx; ++q)
          for (int n = 0; n < g.nz; ++n) nrm += std::norm(p.at(sp, q, n));
        nrm = std::sqrt(nrm);
        double scale = nrm > tau ? (nrm - tau) / nrm : 0.0;
        for (int q = 0; q < g.nx; ++q)
          for (int n = 0; n < g.nz; ++n) p.at(sp, q, n) *= scale;
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("configuration validation") {
  ReconConfig c;
  c.validate();
  ReconConfig bad = c;
  bad.lambda_r = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.cg_tol = -1e-3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.power_iters = 10;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero data reconstructs to zero") {
  Fixture fx;
  MeasurementStack s(fx.g.nf(), fx.g.nx, fx.g.nk);
  ReconConfig cfg;
  cfg.lambda_r = 1e-3;
  ReconResult res = solve_tikhonov(s, fx.h, fx.table, cfg);
  CHECK(norm(res.densities) == 0.0);
  cfg.regularizer = Regularizer::l1;
  ReconResult res2 = solve_fista(s, fx.h, fx.table, cfg);
  CHECK(norm(res2.densities) == 0.0);
}

TEST_CASE("ridge solver matches the dense normal-equation solve") {
  Fixture fx;
  SubstreamRng rng(5, "tikhonov-data");
  MeasurementStack s = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);
  ReconConfig cfg;
  cfg.lambda_r = 1e-3;
  cfg.max_iters = 400;
  cfg.cg_tol = 1e-14;
  ReconResult res = solve_tikhonov(s, fx.h, fx.table, cfg);
  DensityStack want = dense_tikhonov(s, fx.h, fx.table, cfg.lambda_r);
  CHECK(stack_rel_err(res.densities, want) < 1e-8);
  CHECK(res.iterations_run > 0);
  CHECK(res.residual_norm > 0.0);
}

TEST_CASE("conjugate-gradient trace is monotonically non-increasing") {
  Fixture fx;
  SubstreamRng rng(7, "trace-data");
  MeasurementStack s = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);
  ReconConfig cfg;
  cfg.lambda_r = 1e-3;
  cfg.max_iters = 60;
  cfg.cg_tol = 0.0;
  ReconResult res = solve_tikhonov(s, fx.h, fx.table, cfg);
  REQUIRE(res.objective_trace.size() > 1);
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i)
    CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("sparse solver trace ends at the reported objective") {
  Fixture fx;
  SubstreamRng rng(9, "fista-data");
  MeasurementStack s = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);
  ReconConfig cfg;
  cfg.regularizer = Regularizer::l1;
  cfg.lambda_r = 1e-2;
  cfg.max_iters = 80;
  ReconResult res = solve_fista(s, fx.h, fx.table, cfg);
  REQUIRE(!res.objective_trace.empty());
  double f_last = res.objective_trace.back();
  double f_eval = objective(res.densities, s, fx.h, fx.table, cfg);
  CHECK(std::abs(f_last - f_eval) <= 1e-12 * std::abs(f_eval));
}

TEST_CASE("overwhelming sparsity penalty zeroes the solution") {
  Fixture fx;
  SubstreamRng rng(11, "huge-lambda");
  MeasurementStack s = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);
  ReconConfig cfg;
  cfg.regularizer = Regularizer::l1;
  cfg.lambda_r = 1e9;
  cfg.max_iters = 20;
  ReconResult res = solve_fista(s, fx.h, fx.table, cfg);
  CHECK(norm(res.densities) == 0.0);
}

TEST_CASE("accelerated solver reaches the slow reference objective") {
  Fixture fx;
  SubstreamRng rng(13, "fista-vs-ista");
  DensityStack p_true = random_density(rng, 2, fx.g.nx, fx.g.nz);
  // keep only a few active entries so the l1 problem has a sparse optimum
  int kept = 0;
  for (auto& v : p_true.values) {
    if (kept++ % 9 != 0) v = Complex(0, 0);
  }
  MeasurementStack s = apply_forward(p_true, fx.h, fx.table);

  for (Regularizer reg : {Regularizer::l1, Regularizer::group_l21}) {
    ReconConfig cfg;
    cfg.regularizer = reg;
    cfg.lambda_r = 1e-2;
    cfg.max_iters = 600;
    cfg.seed = 1;
    ReconResult fast = solve_fista(s, fx.h, fx.table, cfg);
    DensityStack slow =
        ista_reference(s, fx.h, fx.table, cfg.lambda_r, reg, 20000);
    double f_fast = objective(fast.densities, s, fx.h, fx.table, cfg);
    double f_slow = objective(slow, s, fx.h, fx.table, cfg);
    // the accelerated run must be at least as good, up to small slack
    CHECK(f_fast <= f_slow * (1.0 + 1e-3));
  }
}

TEST_CASE("group penalty removes a spectrally disjoint inactive species") {
  // species supports share no wavenumber, so the data carries exactly zero
  // gradient for species 1 and the block prox must hold it at exactly zero
  Fixture fx(4, 8, 8, 2, 2);
  SpectraMatrix h = SpectraMatrix::Zero(fx.g.nk, 2);
  SubstreamRng hr(21, "disjoint-spectra");
  for (int m = 0; m < 4; ++m) h(m, 0) = Complex(hr.normal(), hr.normal());
  for (int m = 4; m < 8; ++m) h(m, 1) = Complex(hr.normal(), hr.normal());

  SubstreamRng rng(15, "group-sparsity");
  DensityStack p_true(2, fx.g.nx, fx.g.nz);
  // only species 0 is present in the scene
  for (int q = 0; q < fx.g.nx; ++q)
    for (int n = 0; n < fx.g.nz; ++n)
      p_true.at(0, q, n) = Complex(rng.normal(), rng.normal());
  MeasurementStack s = apply_forward(p_true, h, fx.table);

  ReconConfig cfg;
  cfg.regularizer = Regularizer::group_l21;
  cfg.lambda_r = 0.1;
  cfg.max_iters = 800;
  ReconResult res = solve_fista(s, h, fx.table, cfg);

  double energy[2] = {0.0, 0.0};
  for (int sp = 0; sp < 2; ++sp)
    for (int q = 0; q < fx.g.nx; ++q)
      for (int n = 0; n < fx.g.nz; ++n)
        energy[sp] += std::norm(res.densities.at(sp, q, n));
  CHECK(energy[0] > 0.0);
  CHECK(energy[1] == 0.0);
}

TEST_CASE("group penalty suppresses an inactive species under cross-talk") {
  // with overlapping spectra the inactive species cannot be exactly zeroed
  // at finite iterations, but its energy must stay far below the active one
  Fixture fx(4, 8, 8, 2, 2);
  SubstreamRng rng(15, "group-sparsity");
  DensityStack p_true(2, fx.g.nx, fx.g.nz);
  for (int q = 0; q < fx.g.nx; ++q)
    for (int n = 0; n < fx.g.nz; ++n)
      p_true.at(0, q, n) = Complex(rng.normal(), rng.normal());
  MeasurementStack s = apply_forward(p_true, fx.h, fx.table);

  ReconConfig cfg;
  cfg.regularizer = Regularizer::group_l21;
  cfg.lambda_r = 0.1;
  cfg.max_iters = 3000;
  ReconResult res = solve_fista(s, fx.h, fx.table, cfg);

  double energy[2] = {0.0, 0.0};
  for (int sp = 0; sp < 2; ++sp)
    for (int q = 0; q < fx.g.nx; ++q)
      for (int n = 0; n < fx.g.nz; ++n)
        energy[sp] += std::norm(res.densities.at(sp, q, n));
  CHECK(energy[0] > 0.0);
  CHECK(energy[1] <= 2e-3 * energy[0]);
}

TEST_CASE("power iteration estimates the squared operator norm") {
  Fixture fx;
  // dense reference: the largest squared singular value over all blocks
  double want = 0.0;
  for (int q = 0; q < fx.g.nx; ++q) {
    CMatrix phi = assemble_block(q, fx.h, fx.table);
    Eigen::BDCSVD<CMatrix> svd(phi);
    want = std::max(want, svd.singularValues()[0] * svd.singularValues()[0]);
  }
  double got = operator_norm_sq(fx.h, fx.table, 150, 3);
  CHECK(got >= 0.95 * want);
  CHECK(got <= 1.2 * want);
}

TEST_CASE("passband projection is an orthogonal projector") {
  Fixture fx;
  std::vector<PassbandBasis> bases;
  for (int q = 0; q < fx.g.nx; ++q)
    bases.push_back(nullspace_basis(stacked_kernel(fx.table, q), 1e-8));

  SubstreamRng rng(17, "projection");
  DensityStack p = random_density(rng, 2, fx.g.nx, fx.g.nz);
  DensityStack once = project_passband(p, bases);
  DensityStack twice = project_passband(once, bases);
  CHECK(stack_rel_err(twice, once) < 1e-12);
  CHECK(norm(once) <= norm(p) * (1.0 + 1e-12));

  // projection never changes what the instrument can see
  MeasurementStack before = apply_forward(p, fx.h, fx.table);
  MeasurementStack after = apply_forward(once, fx.h, fx.table);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < before.values.size(); ++i) {
    num += std::norm(before.values[i] - after.values[i]);
    den += std::norm(before.values[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-8);

  // full-rank bases leave the stack untouched
  std::vector<PassbandBasis> eye(fx.g.nx);
  for (auto& b : eye) {
    b.v = CMatrix::Identity(fx.g.nz, fx.g.nz);
    b.r = fx.g.nz;
  }
  DensityStack same = project_passband(p, eye);
  CHECK(stack_rel_err(same, p) < 1e-14);

  CHECK_THROWS_AS(project_passband(p, std::vector<PassbandBasis>(2)),
                  ConfigError);
}

TEST_CASE("objective accounts for every penalty choice") {
  Fixture fx;
  SubstreamRng rng(19, "objective");
  DensityStack p = random_density(rng, 2, fx.g.nx, fx.g.nz);
  MeasurementStack s = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);

  MeasurementStack r = apply_forward(p, fx.h, fx.table);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= s.values[i];
  double data_term = 0.5 * norm(r) * norm(r);

  double sum_sq = 0.0, sum_abs = 0.0;
  double per_species[2] = {0.0, 0.0};
  for (int sp = 0; sp < 2; ++sp)
    for (int q = 0; q < fx.g.nx; ++q)
      for (int n = 0; n < fx.g.nz; ++n) {
        Complex v = p.at(sp, q, n);
        sum_sq += std::norm(v);
        sum_abs += std::abs(v);
        per_species[sp] += std::norm(v);
      }

  ReconConfig cfg;
  cfg.lambda_r = 0.37;
  cfg.regularizer = Regularizer::tikhonov;
  CHECK(objective(p, s, fx.h, fx.table, cfg) ==
        doctest::Approx(data_term + 0.37 * sum_sq).epsilon(1e-12));
  cfg.regularizer = Regularizer::l1;
  CHECK(objective(p, s, fx.h, fx.table, cfg) ==
        doctest::Approx(data_term + 0.37 * sum_abs).epsilon(1e-12));
  cfg.regularizer = Regularizer::group_l21;
  double group = std::sqrt(per_species[0]) + std::sqrt(per_species[1]);
  CHECK(objective(p, s, fx.h, fx.table, cfg) ==
        doctest::Approx(data_term + 0.37 * group).epsilon(1e-12));
}
