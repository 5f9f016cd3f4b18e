#include <doctest.h>

#include <cmath>
#include <complex>

#include "helpers.hpp"
#include "spectom/forward.hpp"
#include "spectom/rng.hpp"

using namespace spectom;
using testutil::random_cmatrix;
using testutil::random_cvector;
using testutil::random_density;
using testutil::random_measurement;
using testutil::tiny_geometry;

namespace {

struct Fixture {
  ImagingGeometry g;
  KernelTable table;
  SpectraMatrix h;

  explicit Fixture(int ns = 2)
      : g(tiny_geometry(8, 12, 10, 2)), table(build_kernel_table(g)) {
    SubstreamRng rng(7, "fixture-spectra");
    h = random_cmatrix(rng, g.nk, ns);
  }
};

CVector stack_density_block(const DensityStack& p, int q) {
  CVector x(static_cast<Eigen::Index>(p.ns) * p.nz);
  for (int s = 0; s < p.ns; ++s) x.segment(s * p.nz, p.nz) = p.column(s, q);
  return x;
}

CVector stack_measurement_block(const MeasurementStack& y, int q) {
  CVector v(static_cast<Eigen::Index>(y.nf) * y.nk);
  for (int f = 0; f < y.nf; ++f) v.segment(f * y.nk, y.nk) = y.column(f, q);
  return v;
}

}  // namespace

TEST_CASE("row-wise kronecker product on a hand example") {
  CMatrix a(2, 2), b(2, 3);
  a << Complex(1, 0), Complex(2, 0), Complex(0, 1), Complex(3, 0);
  b << Complex(1, 0), Complex(0, 1), Complex(2, 0),
       Complex(1, 1), Complex(0, 0), Complex(-1, 0);
  CMatrix k = khatri_rao(a, b);
  REQUIRE(k.rows() == 2);
  REQUIRE(k.cols() == 6);
  CMatrix want(2, 6);
  want << Complex(1, 0), Complex(0, 1), Complex(2, 0), Complex(2, 0),
      Complex(0, 2), Complex(4, 0), Complex(-1, 1), Complex(0, 0),
      Complex(0, -1), Complex(3, 3), Complex(0, 0), Complex(-3, 0);
  CHECK((k - want).norm() == 0.0);
  CHECK_THROWS_AS(khatri_rao(CMatrix::Zero(2, 2), CMatrix::Zero(3, 2)),
                  ConfigError);
}

TEST_CASE("matrix-free forward matches the dense per-block assembly") {
  Fixture fx;
  SubstreamRng rng(11, "forward-density");
  DensityStack p = random_density(rng, 2, fx.g.nx, fx.g.nz);
  MeasurementStack y = apply_forward(p, fx.h, fx.table);
  REQUIRE(y.nf == 2);
  REQUIRE(y.nx == 8);
  REQUIRE(y.nk == 10);
  for (int q = 0; q < fx.g.nx; ++q) {
    CMatrix phi = assemble_block(q, fx.h, fx.table);
    REQUIRE(phi.rows() == 20);
    REQUIRE(phi.cols() == 24);
    CVector want = phi * stack_density_block(p, q);
    CVector got = stack_measurement_block(y, q);
    CHECK((got - want).norm() <= 1e-12 * (want.norm() + 1.0));
  }
}

TEST_CASE("dense block equals the explicit kronecker construction") {
  Fixture fx;
  const int q = 3;
  CMatrix stacked = stacked_kernel(fx.table, q);      // (nf*nk) x nz
  CMatrix ones = CMatrix::Ones(fx.g.nf(), 1);
  CMatrix h_rep(fx.g.nf() * fx.g.nk, fx.h.cols());    // 1_nf (x) H
  for (int f = 0; f < fx.g.nf(); ++f)
    h_rep.block(f * fx.g.nk, 0, fx.g.nk, fx.h.cols()) = fx.h;
  CMatrix want = khatri_rao(h_rep, stacked);
  CMatrix got = assemble_block(q, fx.h, fx.table);
  CHECK((got - want).norm() <= 1e-14 * want.norm());
}

TEST_CASE("adjoint satisfies the inner-product identity") {
  Fixture fx(3);
  for (int trial = 0; trial < 10; ++trial) {
    SubstreamRng rng(100 + trial, "adjoint-trial");
    DensityStack p = random_density(rng, 3, fx.g.nx, fx.g.nz);
    MeasurementStack y = random_measurement(rng, fx.g.nf(), fx.g.nx, fx.g.nk);
    Complex lhs = dot(y, apply_forward(p, fx.h, fx.table));
    Complex rhs = dot(apply_adjoint(y, fx.h, fx.table), p);
    double scale = norm(y) * norm(p);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
  }
}

TEST_CASE("block operator matches its own dense assembly") {
  Fixture fx;
  BlockSystem block{fx.h, fx.table, 5};
  REQUIRE(block.rows() == 20);
  REQUIRE(block.cols() == 24);
  CMatrix dense = block.assemble();
  SubstreamRng rng(21, "block-vectors");
  CVector x = random_cvector(rng, static_cast<int>(block.cols()));
  CVector y = random_cvector(rng, static_cast<int>(block.rows()));
  CHECK((block.apply(x) - dense * x).norm() <= 1e-12 * x.norm());
  CHECK((block.adjoint(y) - dense.adjoint() * y).norm() <= 1e-12 * y.norm());
}

TEST_CASE("zero density maps to zero measurements and back") {
  Fixture fx;
  DensityStack p(2, fx.g.nx, fx.g.nz);
  MeasurementStack y = apply_forward(p, fx.h, fx.table);
  CHECK(norm(y) == 0.0);
  DensityStack w = apply_adjoint(MeasurementStack(2, 8, 10), fx.h, fx.table);
  CHECK(norm(w) == 0.0);
}

TEST_CASE("scan transform is the unnormalized transverse DFT") {
  SubstreamRng rng(31, "dft-scan");
  ScanData spatial(2, 8, 5);
  for (auto& v : spatial.values) v = Complex(rng.normal(), rng.normal());

  MeasurementStack fourier = measurements_to_fourier(spatial);

  // direct O(nx^2) DFT as the reference
  for (int f = 0; f < 2; ++f)
    for (int q = 0; q < 8; ++q)
      for (int m = 0; m < 5; ++m) {
        Complex acc(0, 0);
        for (int j = 0; j < 8; ++j) {
          double phase = -2.0 * M_PI * q * j / 8.0;
          acc += spatial.at(f, j, m) * std::polar(1.0, phase);
        }
        CHECK(std::abs(fourier.at(f, q, m) - acc) <= 1e-12);
      }

  // Parseval for the unnormalized pair: |F|^2 = nx * |x|^2
  double spatial_sq = 0.0;
  for (const auto& v : spatial.values) spatial_sq += std::norm(v);
  CHECK(norm(fourier) * norm(fourier) ==
        doctest::Approx(8.0 * spatial_sq).epsilon(1e-12));

  // round trip restores the input
  ScanData back = measurements_to_spatial(fourier);
  double err = 0.0;
  for (std::size_t i = 0; i < back.values.size(); ++i)
    err = std::max(err, std::abs(back.values[i] - spatial.values[i]));
  CHECK(err <= 1e-12);
}

TEST_CASE("density transform round-trips and matches the direct sum") {
  SubstreamRng rng(33, "dft-density");
  DensityStack spatial = random_density(rng, 2, 6, 4);
  DensityStack fourier = density_to_fourier(spatial);
  for (int s = 0; s < 2; ++s)
    for (int q = 0; q < 6; ++q)
      for (int n = 0; n < 4; ++n) {
        Complex acc(0, 0);
        for (int j = 0; j < 6; ++j)
          acc += spatial.at(s, j, n) * std::polar(1.0, -2.0 * M_PI * q * j / 6.0);
        CHECK(std::abs(fourier.at(s, q, n) - acc) <= 1e-12);
      }
  DensityStack back = density_to_spatial(fourier);
  double err = 0.0;
  for (std::size_t i = 0; i < back.values.size(); ++i)
    err = std::max(err, std::abs(back.values[i] - spatial.values[i]));
  CHECK(err <= 1e-12);
}

TEST_CASE("stack inner products are conjugate-linear in the first slot") {
  SubstreamRng rng(41, "dot-checks");
  DensityStack a = random_density(rng, 2, 5, 7);
  DensityStack b = random_density(rng, 2, 5, 7);
  Complex d = dot(a, b);
  Complex manual(0, 0);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    manual += std::conj(a.values[i]) * b.values[i];
  CHECK(std::abs(d - manual) <= 1e-12 * std::abs(manual));
  CHECK(norm(a) == doctest::Approx(std::sqrt(dot(a, a).real())).epsilon(1e-13));

  MeasurementStack u = random_measurement(rng, 2, 5, 7);
  CHECK(norm(u) == doctest::Approx(std::sqrt(dot(u, u).real())).epsilon(1e-13));
}
