#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectom/forward.hpp"
#include "spectom/geometry.hpp"
#include "spectom/kernel.hpp"
#include "spectom/spectra.hpp"
#include "spectom/types.hpp"

namespace spectom {

//! A point target inside the imaging region.
struct PointScatterer {
  double x = 0.0;       //!< transverse position, micrometres, in [0, Lx]
  double z = 0.0;       //!< depth, micrometres, in [0, Lz]
  int species = 0;      //!< column index into the active spectra selection
  double strength = 1.0;  //!< positive susceptibility scaling
};

enum class ScatterMode { born, foldy };

struct SimulationConfig {
  ScatterMode mode = ScatterMode::born;
  ImagingGeometry geometry;
  //! Per-species circular-Gaussian spectral-noise variance; empty means none.
  std::vector<double> spectral_noise;
  std::uint64_t seed = 0;
  double delta = 1.0;  //!< global object scaling, in (0, 1]

  void validate(int n_species) const;
};

//! 2D free-space outgoing Green's function (i/4) H0^(1)(k0 |r - r'|).
Complex hankel0_first_kind(double x);
Complex green_2d(double k0, double x1, double z1, double x2, double z2);

//! Focused illumination beam sampled at (x, z): angular-spectrum integral
//! over the aperture with Gaussian pupil and 1/kz weighting; the matching
//! collection factor omits the 1/kz (reciprocal detection through the same
//! aperture). Products of the two transform to the imaging kernel rows.
Complex incident_beam(double x, double z, double r0x, double zf, double k0,
                      double na, int nodes = kDefaultQuadratureNodes);
Complex collection_beam(double x, double z, double r0x, double zf, double k0,
                        double na, int nodes = kDefaultQuadratureNodes);

//! Self-consistent multiple-scattering solve: (I - M) psi = incident with
//! M[n,m] = alpha_m G(r_n, r_m), alpha_m = strength_m * eta_m * delta_scatter.
CVector foldy_lax_solve(const std::vector<PointScatterer>& scatterers,
                        const CVector& species_eta, const CVector& incident,
                        double k0, double delta_scatter);

//! Per-location perturbed copies of one spectral profile:
//! row n = h + e_n, e_n i.i.d. circular complex Gaussian CN(0, xi).
CMatrix perturb_spectra(const CVector& h_s, double xi_s, int n_locations,
                        std::uint64_t seed, std::uint64_t substream = 0);

//! Synthetic phase-resolved measurements on the scan grid [f, j, m].
ScanData simulate_point_data(const std::vector<PointScatterer>& scatterers,
                             const SpectraMatrix& h,
                             const SimulationConfig& config);

//! || s - s_born || / || s_born ||.
double multiple_scattering_ratio(const ScanData& s, const ScanData& s_born);

//! Dense method-of-moments solve of the volume integral equation on a pixel
//! grid (nx x nz cells, budget 64x64), one wavenumber; returns collected
//! scattered data per (focal plane, scan position). The source power
//! spectrum is not applied (flat weighting); scale externally if needed.
CMatrix lippmann_schwinger_coarse(const CMatrix& grid_eta,
                                  const ImagingGeometry& geometry, double k0);

//! On-grid reference densities for a phantom: strength lands on the nearest
//! grid node with the discretization weight that makes the linear forward
//! model reproduce Born point data.
DensityStack scatterers_to_density(const std::vector<PointScatterer>& scatterers,
                                   int n_species, const ImagingGeometry& geometry,
                                   double scale = 1.0);

//! Plain-text phantom description: one "x z species strength" line per
//! scatterer, '#' comments allowed.
std::vector<PointScatterer> load_phantom(const std::string& path);
void save_phantom(const std::string& path,
                  const std::vector<PointScatterer>& scatterers);

}  // namespace spectom
