#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "helpers.hpp"
#include "spectom/spectra.hpp"

using namespace spectom;

namespace {

RVector grid(int nk, double kmin = 0.7, double kmax = 2.1) {
  RVector g(nk);
  for (int i = 0; i < nk; ++i) g[i] = kmin + (kmax - kmin) * i / (nk - 1);
  return g;
}

}  // namespace

TEST_CASE("susceptibility_from_index") {
  Complex eta = susceptibility_from_index(1.5, 0.2);
  CHECK(eta.real() == doctest::Approx(1.21).epsilon(1e-15));
  CHECK(eta.imag() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(susceptibility_from_index(1.0, 0.0) == Complex(0.0, 0.0));
}

TEST_CASE("synth_lorentzian is deterministic in the seed") {
  RVector ks = grid(16);
  SpectralProfile a = synth_lorentzian(42, ks);
  SpectralProfile b = synth_lorentzian(42, ks);
  SpectralProfile c = synth_lorentzian(43, ks);
  CHECK((a.values - b.values).norm() == 0.0);
  CHECK((a.values - c.values).norm() != 0.0);
  CHECK(a.kind == ProfileKind::physical);
}

TEST_CASE("synth_lorentzian with zero oscillators reduces to the flat background") {
  RVector ks = grid(8);
  SpectralProfile p = synth_lorentzian(7, 0, {0.25, 0.25}, {0, 0}, {1, 2}, {1, 2}, ks);
  for (int i = 0; i < 8; ++i) CHECK(p.values[i] == Complex(0.25, 0.0));
}

TEST_CASE("synth_lorentzian has non-negative absorption") {
  // Im h = sum sigma*gamma*k0 / |nu^2 - k0^2 - i gamma k0|^2 >= 0
  RVector ks = grid(64);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SpectralProfile p = synth_lorentzian(seed, ks);
    for (int i = 0; i < 64; ++i) CHECK(p.values[i].imag() >= 0.0);
  }
}

TEST_CASE("random_profile draws Re before Im with the documented laws") {
  SpectralProfile p = random_profile(5, 4096);
  SpectralProfile q = random_profile(5, 4096);
  CHECK((p.values - q.values).norm() == 0.0);
  CHECK(p.kind == ProfileKind::synthetic_random);
  double re_mean = 0.0, re_var = 0.0;
  for (int i = 0; i < 4096; ++i) {
    re_mean += p.values[i].real();
    CHECK(p.values[i].imag() >= 0.0);
    CHECK(p.values[i].imag() < 1.0);
  }
  re_mean /= 4096;
  for (int i = 0; i < 4096; ++i) {
    double d = p.values[i].real() - re_mean;
    re_var += d * d;
  }
  re_var /= 4095;
  CHECK(std::abs(re_mean) < 0.1);       // ~N(0, 1/sqrt(4096))
  CHECK(re_var == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("build_H stacks selected profiles in order and rejects bad selections") {
  SpectralLibrary lib;
  lib.wavenumbers = grid(6);
  for (int s = 0; s < 4; ++s) {
    SpectralProfile p = random_profile(100 + s, 6);
    p.name = "p" + std::to_string(s);
    lib.profiles.push_back(p);
  }
  SpectraMatrix h = build_H(lib, {2, 0});
  CHECK(h.rows() == 6);
  CHECK(h.cols() == 2);
  CHECK((h.col(0) - lib.profiles[2].values).norm() == 0.0);
  CHECK((h.col(1) - lib.profiles[0].values).norm() == 0.0);
  CHECK_THROWS_AS(build_H(lib, {0, 4}), ConfigError);
  CHECK_THROWS_AS(build_H(lib, {-1}), ConfigError);
  CHECK_THROWS_AS(build_H(lib, {1, 1}), ConfigError);
}

TEST_CASE("library validation enforces the grid and physical-sign contracts") {
  SpectralLibrary lib;
  lib.wavenumbers = grid(6);
  lib.profiles.push_back(random_profile(1, 6));
  CHECK_NOTHROW(lib.validate());

  SpectralLibrary bad_len = lib;
  bad_len.profiles[0].values.conservativeResize(5);
  CHECK_THROWS_AS(bad_len.validate(), ConfigError);

  SpectralLibrary bad_grid = lib;
  bad_grid.wavenumbers[3] += 0.05;  // non-uniform spacing
  CHECK_THROWS_AS(bad_grid.validate(), ConfigError);

  SpectralLibrary bad_order = lib;
  bad_order.wavenumbers[1] = bad_order.wavenumbers[0];
  CHECK_THROWS_AS(bad_order.validate(), ConfigError);

  SpectralLibrary bad_sign = lib;
  bad_sign.profiles[0].kind = ProfileKind::physical;
  bad_sign.profiles[0].values[2] = Complex(1.0, -0.5);
  CHECK_THROWS_AS(bad_sign.validate(), ConfigError);
}

TEST_CASE("spectra CSV round trip preserves values exactly") {
  SpectralLibrary lib;
  lib.wavenumbers = grid(12);
  for (int s = 0; s < 3; ++s) {
    SpectralProfile p = synth_lorentzian(200 + s, lib.wavenumbers);
    p.name = "species" + std::to_string(s);
    lib.profiles.push_back(p);
  }
  std::stringstream buf;
  save_spectra_csv(lib, buf);
  std::string text = buf.str();
  CHECK(text.substr(0, 34) == "k0,species0_re,species0_im,species");

  std::stringstream in(text);
  SpectralLibrary back = load_spectra_csv(in);
  REQUIRE(back.size() == 3);
  REQUIRE(back.nk() == 12);
  for (int i = 0; i < 12; ++i)
    CHECK(back.wavenumbers[i] == lib.wavenumbers[i]);  // 17 digits round-trip exactly
  for (int s = 0; s < 3; ++s) {
    CHECK(back.profiles[s].name == lib.profiles[s].name);
    CHECK((back.profiles[s].values - lib.profiles[s].values).norm() == 0.0);
  }
}

TEST_CASE("spectra CSV loader rejects malformed inputs") {
  auto load = [](const std::string& text) {
    std::stringstream in(text);
    return load_spectra_csv(in);
  };
  CHECK_THROWS_AS(load(""), ConfigError);
  CHECK_THROWS_AS(load("wavenumber,a_re,a_im\n1,0,0\n"), ConfigError);
  CHECK_THROWS_AS(load("k0,a_re\n1,0\n"), ConfigError);
  CHECK_THROWS_AS(load("k0,a_re,b_im\n1,0,0\n"), ConfigError);
  CHECK_THROWS_AS(load("k0,a_re,a_im\n1,0\n"), ConfigError);
  CHECK_THROWS_AS(load("k0,a_re,a_im\n1,zebra,0\n2,0,0\n"), ConfigError);
}

TEST_CASE("resample_library interpolates linearly and refuses extrapolation") {
  SpectralLibrary lib;
  lib.wavenumbers = grid(5, 1.0, 2.0);  // spacing 0.25
  SpectralProfile p;
  p.name = "line";
  p.kind = ProfileKind::physical;
  p.values.resize(5);
  for (int i = 0; i < 5; ++i)
    p.values[i] = Complex(2.0 * lib.wavenumbers[i] + 1.0, lib.wavenumbers[i]);
  lib.profiles.push_back(p);

  RVector target(3);
  target << 1.125, 1.5, 1.95;
  SpectralLibrary out = resample_library(lib, target);
  for (int i = 0; i < 3; ++i) {
    CHECK(out.profiles[0].values[i].real() ==
          doctest::Approx(2.0 * target[i] + 1.0).epsilon(1e-12));
    CHECK(out.profiles[0].values[i].imag() == doctest::Approx(target[i]).epsilon(1e-12));
  }

  // identical grid reproduces the samples exactly
  SpectralLibrary same = resample_library(lib, lib.wavenumbers);
  CHECK((same.profiles[0].values - lib.profiles[0].values).norm() == 0.0);

  RVector outside(1);
  outside << 2.01;
  CHECK_THROWS_AS(resample_library(lib, outside), ConfigError);
}
