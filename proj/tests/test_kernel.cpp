#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spectom/kernel.hpp"

using namespace spectom;
using testutil::rel_err;
using testutil::tiny_geometry;

TEST_CASE("axial wavenumber") {
  CHECK(kz(0.6, 1.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(kz(0.0, 1.3) == doctest::Approx(1.3).epsilon(1e-15));
  CHECK_THROWS_AS(kz(1.1, 1.0), NumericalError);
}

TEST_CASE("effective rank estimate") {
  CHECK(effective_rank(150.0, 0.7, 2.1) == 67);
  // the formula value for the published table geometry (table lists 60)
  CHECK(effective_rank(282.4, 0.4, 1.1) == 63);
  CHECK(effective_rank(40.0, 0.7, 2.1) == 18);
}

TEST_CASE("gauss-legendre nodes match the analytic three-point rule") {
  const GaussLegendre& gl = gauss_legendre(3);
  REQUIRE(gl.x.size() == 3);
  CHECK(gl.x[0] == doctest::Approx(-std::sqrt(0.6)).epsilon(1e-14));
  CHECK(gl.x[1] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gl.x[2] == doctest::Approx(std::sqrt(0.6)).epsilon(1e-14));
  CHECK(gl.w[0] == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
  CHECK(gl.w[1] == doctest::Approx(8.0 / 9.0).epsilon(1e-14));
  CHECK(gl.w[2] == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
  // degree-4 polynomial integrated exactly by the 3-point rule
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += gl.w[i] * std::pow(gl.x[i], 4);
  CHECK(acc == doctest::Approx(0.4).epsilon(1e-14));
  // cached instance is reused
  CHECK(&gauss_legendre(3) == &gl);
}

TEST_CASE("kernel point values match an independent high-precision integration") {
  struct Case {
    double kx, z, k0, na, pk2;
    Complex want;
  };
  // reference values from 40-digit adaptive integration of the defining
  // k'-integral (tanh-sinh, endpoint singularities handled analytically)
  const Case cases[] = {
      {0.3, 12.0, 1.1, 0.4, 1.0, {1.41151492072700855, 0.959959288934094435}},
      {1.7, 3.5, 1.0, 0.5, 1.0, {-0.00838089902380264892, -0.00167829881178265047}},
      {0.0, 0.0, 1.4, 0.3, 1.0, {2.1568130681509465, 0.0}},
      {-0.9, -7.25, 1.3, 0.5, 2.5, {-0.104546210746906052, 1.1450819294835754}},
  };
  for (const auto& c : cases) {
    Complex got = isam_kernel_point(c.kx, c.z, c.k0, c.na, c.pk2);
    CHECK(std::abs(got - c.want) <= 1e-7 * std::abs(c.want));
  }
}

TEST_CASE("kernel vanishes identically outside the scattering band") {
  CHECK(isam_kernel_point(2.0, 5.0, 1.0, 0.5, 1.0) == Complex(0.0, 0.0));
  CHECK(isam_kernel_point(-2.6, 5.0, 1.3, 0.5, 1.0) == Complex(0.0, 0.0));
  CHECK(isam_kernel_point(0.5, 5.0, 1.0, 0.5, 0.0) == Complex(0.0, 0.0));
}

TEST_CASE("kernel is even in the transverse frequency") {
  for (double kx : {0.3, 0.9, 1.7}) {
    Complex a = isam_kernel_point(kx, 12.3, 1.3, 0.4, 1.0);
    Complex b = isam_kernel_point(-kx, 12.3, 1.3, 0.4, 1.0);
    CHECK(std::abs(a - b) <= 1e-13 * std::abs(a));
  }
}

TEST_CASE("kernel scales linearly in the power spectrum weight") {
  Complex a = isam_kernel_point(0.4, 6.0, 1.2, 0.45, 1.0);
  Complex b = isam_kernel_point(0.4, 6.0, 1.2, 0.45, 3.5);
  CHECK(rel_err(b, 3.5 * a) < 1e-14);
}

TEST_CASE("quadrature is converged at the default node count") {
  for (double kx : {0.0, 0.7, 1.9}) {
    for (double z : {-20.0, 4.5, 25.0}) {
      Complex a = isam_kernel_point(kx, z, 1.4, 0.5, 1.0, kDefaultQuadratureNodes);
      Complex b = isam_kernel_point(kx, z, 1.4, 0.5, 1.0, 2 * kDefaultQuadratureNodes + 1);
      CHECK(std::abs(a - b) <= 1e-6 * (std::abs(b) + 1e-3));
    }
  }
}

TEST_CASE("passband membership") {
  // axial backscattering at in-band k0: (0, -2k0) with kmin < k0 < kmax
  CHECK(passband_contains(0.0, -2.8, 0.7, 2.1, 0.5));
  // radius below 2*kmin or above 2*kmax is unreachable
  CHECK_FALSE(passband_contains(0.0, -1.2, 0.7, 2.1, 0.5));
  CHECK_FALSE(passband_contains(0.0, -4.4, 0.7, 2.1, 0.5));
  // forward-scattering half plane is never collected
  CHECK_FALSE(passband_contains(0.0, 2.8, 0.7, 2.1, 0.5));
  // transverse component beyond the aperture cone
  CHECK_FALSE(passband_contains(2.7, -1.0, 0.7, 2.1, 0.5));
  // inside the cone: kx = 2 k0 sin(t), kz = -2 k0 cos(t) with sin(t) < na
  double k0 = 1.4, t = 0.3;
  CHECK(passband_contains(2 * k0 * std::sin(t), -2 * k0 * std::cos(t), 0.7, 2.1, 0.5));
}

TEST_CASE("kernel table agrees with pointwise evaluation and mirrors q") {
  ImagingGeometry g = tiny_geometry(8, 12, 10, 2);
  KernelTable table = build_kernel_table(g);
  CHECK(table.quadrature_nodes == kDefaultQuadratureNodes);
  REQUIRE(table.coefficients.size() ==
          static_cast<std::size_t>(2) * 8 * 10 * 12);

  // spot-check the z-recurrence against direct evaluation
  for (int f : {0, 1})
    for (int q : {0, 1, 3, 4})
      for (int m : {0, 4, 9})
        for (int n : {0, 5, 11}) {
          Complex direct = isam_kernel_point(
              g.kx(q), g.z(n) - g.focal_planes[f], g.wavenumber(m), g.na, g.pk2(m));
          Complex stored = table.at(f, q, m, n);
          CHECK(std::abs(stored - direct) <= 1e-10 * (std::abs(direct) + 1e-12));
        }

  // mirror copies are bit-exact
  for (int f : {0, 1})
    for (int q : {1, 2, 3})
      for (int m : {0, 7})
        for (int n : {0, 6}) CHECK(table.at(f, q, m, n) == table.at(f, 8 - q, m, n));

  // block() maps the same storage as at()
  auto block = table.block(1, 3);
  CHECK(block(4, 7) == table.at(1, 3, 4, 7));
}

TEST_CASE("table rows outside the passband are exact zeros") {
  // lx small -> kx(1) = 2*pi/5 * 1 = 1.257; choose band so 2*kmin < kx(2)
  ImagingGeometry g = tiny_geometry(8, 6, 4, 1);
  g.lx = 5.0;  // kx(q) = 1.257 q for q <= 4
  g.kmin = 0.5;
  g.kmax = 0.9;
  KernelTable table = build_kernel_table(g);
  for (int q = 2; q <= 4; ++q)  // kx >= 2.51 > 2*kmax = 1.8
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 6; ++n) CHECK(table.at(0, q, m, n) == Complex(0.0, 0.0));
  // row-level support: kx(1) = 1.257 > 2*k0 for k0 = 0.5 but < 2*0.9
  CHECK(table.at(0, 1, 0, 3) == Complex(0.0, 0.0));
  CHECK(table.at(0, 1, 3, 3) != Complex(0.0, 0.0));
}

TEST_CASE("stacked kernel concatenates focal-plane blocks") {
  ImagingGeometry g = tiny_geometry(6, 8, 5, 3);
  KernelTable table = build_kernel_table(g);
  CMatrix stack = stacked_kernel(table, 2);
  REQUIRE(stack.rows() == 15);
  REQUIRE(stack.cols() == 8);
  for (int f = 0; f < 3; ++f)
    for (int m = 0; m < 5; ++m)
      for (int n = 0; n < 8; ++n)
        CHECK(stack(f * 5 + m, n) == table.at(f, 2, m, n));
}
