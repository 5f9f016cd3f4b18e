#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "spectom/types.hpp"

namespace spectom {

enum class ProfileKind { physical, synthetic_random };

//! One complex spectral profile h(k0) sampled on the instrument grid.
struct SpectralProfile {
  std::string name;
  CVector values;
  ProfileKind kind = ProfileKind::physical;
};

//! Ordered set of profiles sharing one uniformly spaced wavenumber grid.
struct SpectralLibrary {
  std::vector<SpectralProfile> profiles;
  RVector wavenumbers;  // k_i = kmin + i*dk, rad/um

  int size() const { return static_cast<int>(profiles.size()); }
  int nk() const { return static_cast<int>(wavenumbers.size()); }

  //! Throws ConfigError if grids/lengths/signs violate the contracts.
  void validate() const;
};

//! H[m, s] = h_s(k_m); columns follow the selection order.
using SpectraMatrix = CMatrix;

//! eta = (n_r^2 - kappa^2 - 1) + i*(2 n_r kappa).
Complex susceptibility_from_index(double n_r, double kappa);

using Range = std::pair<double, double>;

//! Sum-of-Lorentzians synthesis: h(k0) = sigma0 + sum_n sigma_n /
//! (nu_n^2 - k0^2 - i*gamma_n*k0). Draw order per oscillator is
//! (sigma, nu, gamma), after one sigma0 draw; all Unif over the given ranges.
SpectralProfile synth_lorentzian(std::uint64_t seed, int n_oscillators,
                                 Range sigma0_range, Range sigma_range,
                                 Range nu_range, Range gamma_range,
                                 const RVector& wavenumbers);

//! Default synthesis ranges: sigma in [0,0.1], nu in [1.2pi,4.4pi],
//! gamma in [2pi e-3, 4pi e-2], 99 oscillators.
SpectralProfile synth_lorentzian(std::uint64_t seed, const RVector& wavenumbers);

//! Re ~ N(0,1), Im ~ Unif[0,1], i.i.d. per sample (Re drawn before Im).
SpectralProfile random_profile(std::uint64_t seed, int nk);

//! Column s = library profile selection[s]. Indices must be distinct and
//! in bounds.
SpectraMatrix build_H(const SpectralLibrary& library,
                      const std::vector<int>& selection);

//! CSV with header "k0,<name>_re,<name>_im,..."; one row per wavenumber.
SpectralLibrary load_spectra_csv(std::istream& in);
SpectralLibrary load_spectra_csv(const std::string& path);
void save_spectra_csv(const SpectralLibrary& library, std::ostream& out);
void save_spectra_csv(const SpectralLibrary& library, const std::string& path);

//! Linear interpolation onto a new grid; any target point outside the
//! library's grid is an error (no extrapolation).
SpectralLibrary resample_library(const SpectralLibrary& library,
                                 const RVector& target_wavenumbers);

}  // namespace spectom
