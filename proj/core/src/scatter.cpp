#include "spectom/scatter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spectom/parallel.hpp"
#include "spectom/rng.hpp"

namespace spectom {

void SimulationConfig::validate(int n_species) const {
  geometry.validate();
  if (!(delta > 0.0 && delta <= 1.0))
    throw ConfigError("SimulationConfig: delta must lie in (0, 1]");
  if (!spectral_noise.empty() &&
      static_cast<int>(spectral_noise.size()) != n_species)
    throw ConfigError(
        "SimulationConfig: spectral_noise must be empty or one value per species");
  for (double xi : spectral_noise)
    if (!(xi >= 0.0))
      throw ConfigError("SimulationConfig: spectral_noise entries must be >= 0");
}

Complex hankel0_first_kind(double x) {
  if (!(x > 0.0))
    throw NumericalError("hankel0_first_kind: argument must be positive");
  return {std::cyl_bessel_j(0, x), std::cyl_neumann(0, x)};
}

Complex green_2d(double k0, double x1, double z1, double x2, double z2) {
  double r = std::hypot(x1 - x2, z1 - z2);
  if (r == 0.0)
    throw NumericalError("green_2d: coincident points");
  return Complex(0.0, 0.25) * hankel0_first_kind(k0 * r);
}

namespace {

//! Shared evaluation of the two beam factors. The angular integral over the
//! aperture is mapped to theta in [-pi/2, pi/2]; the Jacobian cancels the
//! illumination 1/kz weight, the collection factor keeps kz.
void beam_pair(double u, double zeta, double k0, double na, int nodes,
               Complex& illum, Complex& collect) {
  const GaussLegendre& gl = gauss_legendre(nodes);
  const double half = M_PI / 2.0;
  const double inv_pupil = 1.0 / (k0 * na * k0 * na);
  Complex gi(0.0, 0.0), gc(0.0, 0.0);
  for (int t = 0; t < nodes; ++t) {
    double theta = half * gl.x[t];
    double w = half * gl.w[t];
    double kp = k0 * std::sin(theta);
    double kz = k0 * std::cos(theta);
    double pup = w * std::exp(-kp * kp * inv_pupil);
    double phase = kp * u + kz * zeta;
    Complex e(std::cos(phase), std::sin(phase));
    gi += pup * e;
    gc += pup * kz * e;
  }
  illum = gi;
  collect = gc;
}

}  // namespace

Complex incident_beam(double x, double z, double r0x, double zf, double k0,
                      double na, int nodes) {
  if (!(k0 > 0.0)) throw ConfigError("incident_beam: k0 must be positive");
  if (nodes < 2) throw ConfigError("incident_beam: need at least 2 nodes");
  Complex gi, gc;
  beam_pair(x - r0x, z - zf, k0, na, nodes, gi, gc);
  return gi;
}

Complex collection_beam(double x, double z, double r0x, double zf, double k0,
                        double na, int nodes) {
  if (!(k0 > 0.0)) throw ConfigError("collection_beam: k0 must be positive");
  if (nodes < 2) throw ConfigError("collection_beam: need at least 2 nodes");
  Complex gi, gc;
  beam_pair(x - r0x, z - zf, k0, na, nodes, gi, gc);
  return gc;
}

namespace {

void require_distinct(const std::vector<PointScatterer>& sc) {
  for (std::size_t a = 0; a < sc.size(); ++a)
    for (std::size_t b = a + 1; b < sc.size(); ++b)
      if (sc[a].x == sc[b].x && sc[a].z == sc[b].z)
        throw ConfigError("scatterer positions must be distinct");
}

//! Coupling matrix I - M for the multiple-scattering system.
CMatrix foldy_system(const std::vector<PointScatterer>& sc,
                     const CVector& alpha, double k0) {
  const int n = static_cast<int>(sc.size());
  CMatrix m = CMatrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        m(i, j) -= alpha[j] * green_2d(k0, sc[i].x, sc[i].z, sc[j].x, sc[j].z);
  return m;
}

CVector solve_checked(const CMatrix& system, const CVector& rhs,
                      const char* who) {
  Eigen::PartialPivLU<CMatrix> lu(system);
  CVector out = lu.solve(rhs);
  double resid = (system * out - rhs).norm();
  if (!out.allFinite() || resid > 1e-8 * (rhs.norm() + 1e-300))
    throw NumericalError(std::string(who) + ": singular or near-singular system");
  return out;
}

}  // namespace

CVector foldy_lax_solve(const std::vector<PointScatterer>& scatterers,
                        const CVector& species_eta, const CVector& incident,
                        double k0, double delta_scatter) {
  const int n = static_cast<int>(scatterers.size());
  if (species_eta.size() != n || incident.size() != n)
    throw ConfigError("foldy_lax_solve: per-scatterer vectors must match count");
  if (!(k0 > 0.0)) throw ConfigError("foldy_lax_solve: k0 must be positive");
  require_distinct(scatterers);
  if (n == 0) return CVector();
  CVector alpha(n);
  for (int i = 0; i < n; ++i)
    alpha[i] = scatterers[i].strength * species_eta[i] * delta_scatter;
  return solve_checked(foldy_system(scatterers, alpha, k0), incident,
                       "foldy_lax_solve");
}

CMatrix perturb_spectra(const CVector& h_s, double xi_s, int n_locations,
                        std::uint64_t seed, std::uint64_t substream) {
  if (!(xi_s >= 0.0)) throw ConfigError("perturb_spectra: xi must be >= 0");
  if (n_locations < 0) throw ConfigError("perturb_spectra: negative count");
  CMatrix out(n_locations, h_s.size());
  SubstreamRng rng(seed, "perturb-spectra", substream);
  for (int n = 0; n < n_locations; ++n)
    for (Eigen::Index m = 0; m < h_s.size(); ++m)
      out(n, m) = h_s[m] + (xi_s > 0.0 ? rng.circular_normal(xi_s)
                                       : Complex(0.0, 0.0));
  return out;
}

ScanData simulate_point_data(const std::vector<PointScatterer>& scatterers,
                             const SpectraMatrix& h,
                             const SimulationConfig& config) {
  const ImagingGeometry& g = config.geometry;
  config.validate(static_cast<int>(h.cols()));
  if (static_cast<int>(h.rows()) != g.nk)
    throw ConfigError("simulate_point_data: spectra rows must equal nk");
  require_distinct(scatterers);
  const int n = static_cast<int>(scatterers.size());
  for (const auto& s : scatterers) {
    if (!(s.x >= 0.0 && s.x <= g.lx && s.z >= 0.0 && s.z <= g.lz))
      throw ConfigError("simulate_point_data: scatterer outside imaging region");
    if (s.species < 0 || s.species >= h.cols())
      throw ConfigError("simulate_point_data: species index out of range");
    if (!(s.strength > 0.0))
      throw ConfigError("simulate_point_data: strength must be positive");
  }

  ScanData out(g.nf(), g.nx, g.nk);
  if (n == 0) return out;

  // Per-location spectra, perturbed per species stream so datasets are
  // reproducible independent of evaluation order.
  const int ns = static_cast<int>(h.cols());
  std::vector<std::vector<int>> locs_of_species(ns);
  for (int i = 0; i < n; ++i)
    locs_of_species[scatterers[i].species].push_back(i);
  CMatrix h_loc(n, g.nk);  // row i: spectrum of scatterer i
  for (int s = 0; s < ns; ++s) {
    if (locs_of_species[s].empty()) continue;
    double xi = config.spectral_noise.empty() ? 0.0 : config.spectral_noise[s];
    CMatrix rows = perturb_spectra(h.col(s), xi,
                                   static_cast<int>(locs_of_species[s].size()),
                                   config.seed, static_cast<std::uint64_t>(s));
    for (std::size_t t = 0; t < locs_of_species[s].size(); ++t)
      h_loc.row(locs_of_species[s][t]) = rows.row(t);
  }

  const double d_scat = g.dx() * g.dz();
  const int nodes = kDefaultQuadratureNodes;
  const GaussLegendre& gl = gauss_legendre(nodes);
  const double half = M_PI / 2.0;

  parallel_for(g.nk, [&](int m) {
    const double k0 = g.wavenumber(m);
    const double cmul =
        g.pk2(m) / (2.0 * M_PI * k0 * k0 * g.na * g.na);
    const double inv_pupil = 1.0 / (k0 * g.na * k0 * g.na);

    // polarizabilities at this wavenumber
    CVector alpha(n);
    for (int i = 0; i < n; ++i)
      alpha[i] = scatterers[i].strength * config.delta * h_loc(i, m) * d_scat;

    Eigen::PartialPivLU<CMatrix> lu;
    if (config.mode == ScatterMode::foldy)
      lu.compute(foldy_system(scatterers, alpha, k0));

    // beam factors for every (scatterer, scan position) via a per-node
    // geometric phase recurrence along the scan axis
    CMatrixRM gi(n, g.nx), gc(n, g.nx);
    for (int f = 0; f < g.nf(); ++f) {
      gi.setZero();
      gc.setZero();
      for (int t = 0; t < nodes; ++t) {
        double theta = half * gl.x[t];
        double w = half * gl.w[t];
        double kp = k0 * std::sin(theta);
        double kz = k0 * std::cos(theta);
        double pup = w * std::exp(-kp * kp * inv_pupil);
        Complex step(std::cos(kp * g.dx()), -std::sin(kp * g.dx()));
        for (int i = 0; i < n; ++i) {
          double ph = kp * scatterers[i].x +
                      kz * (scatterers[i].z - g.focal_planes[f]);
          Complex p(pup * std::cos(ph), pup * std::sin(ph));
          for (int j = 0; j < g.nx; ++j) {
            gi(i, j) += p;
            gc(i, j) += kz * p;
            p *= step;
          }
        }
      }
      for (int j = 0; j < g.nx; ++j) {
        CVector incident(n);
        for (int i = 0; i < n; ++i) incident[i] = gi(i, j);
        CVector psi;
        if (config.mode == ScatterMode::foldy) {
          psi = lu.solve(incident);
          if (!psi.allFinite())
            throw NumericalError("simulate_point_data: singular coupling system");
        } else {
          psi = incident;
        }
        Complex acc(0.0, 0.0);
        for (int i = 0; i < n; ++i) acc += alpha[i] * gc(i, j) * psi[i];
        out.values[out.index(f, j, m)] = cmul * acc;
      }
    }
  });
  return out;
}

double multiple_scattering_ratio(const ScanData& s, const ScanData& s_born) {
  if (s.values.size() != s_born.values.size() || s.nf != s_born.nf ||
      s.nx != s_born.nx || s.nk != s_born.nk)
    throw ConfigError("multiple_scattering_ratio: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    num += std::norm(s.values[i] - s_born.values[i]);
    den += std::norm(s_born.values[i]);
  }
  if (den == 0.0)
    throw NumericalError("multiple_scattering_ratio: zero reference data");
  return std::sqrt(num / den);
}

CMatrix lippmann_schwinger_coarse(const CMatrix& grid_eta,
                                  const ImagingGeometry& geometry, double k0) {
  const int nx = static_cast<int>(grid_eta.rows());
  const int nz = static_cast<int>(grid_eta.cols());
  if (static_cast<long>(nx) * nz > 64L * 64L)
    throw BudgetError("lippmann_schwinger_coarse: grid exceeds 64x64 budget");
  if (!(k0 > 0.0))
    throw ConfigError("lippmann_schwinger_coarse: k0 must be positive");
  const double dx = geometry.lx / nx;
  const double dz = geometry.lz / nz;
  const double cell = dx * dz;
  const int cells = nx * nz;

  // pixel centres on the node lattice used by the rest of the pipeline
  std::vector<double> px(cells), pz(cells);
  CVector coupling(cells);
  for (int j = 0; j < nx; ++j)
    for (int nzi = 0; nzi < nz; ++nzi) {
      int idx = j * nz + nzi;
      px[idx] = j * dx;
      pz[idx] = nzi * dz;
      coupling[idx] = grid_eta(j, nzi) * k0 * k0 * cell;
    }

  CMatrix system = CMatrix::Identity(cells, cells);
  for (int a = 0; a < cells; ++a)
    for (int b = 0; b < cells; ++b)
      if (a != b)
        system(a, b) -=
            coupling[b] * green_2d(k0, px[a], pz[a], px[b], pz[b]);
  Eigen::PartialPivLU<CMatrix> lu(system);

  const double cmul = 1.0 / (2.0 * M_PI * k0 * k0 * geometry.na * geometry.na);
  CMatrix out(geometry.nf(), geometry.nx);
  for (int f = 0; f < geometry.nf(); ++f) {
    double zf = geometry.focal_planes[f];
    for (int j0 = 0; j0 < geometry.nx; ++j0) {
      double r0x = j0 * geometry.dx();
      CVector incident(cells), collect(cells);
      for (int c = 0; c < cells; ++c) {
        Complex gi, gc;
        beam_pair(px[c] - r0x, pz[c] - zf, k0, geometry.na,
                  kDefaultQuadratureNodes, gi, gc);
        incident[c] = gi;
        collect[c] = gc;
      }
      CVector u = lu.solve(incident);
      if (!u.allFinite())
        throw NumericalError("lippmann_schwinger_coarse: singular system");
      Complex acc(0.0, 0.0);
      for (int c = 0; c < cells; ++c) acc += coupling[c] * collect[c] * u[c];
      out(f, j0) = cmul * acc;
    }
  }
  return out;
}

DensityStack scatterers_to_density(const std::vector<PointScatterer>& scatterers,
                                   int n_species, const ImagingGeometry& geometry,
                                   double scale) {
  DensityStack p(n_species, geometry.nx, geometry.nz);
  // point measure (dx*dz) over the transverse DFT normalization (dx)
  const double weight = geometry.dx() * geometry.dz() / geometry.dx();
  for (const auto& s : scatterers) {
    if (s.species < 0 || s.species >= n_species)
      throw ConfigError("scatterers_to_density: species index out of range");
    int j = static_cast<int>(std::lround(s.x / geometry.dx())) % geometry.nx;
    int n = static_cast<int>(std::lround(s.z / geometry.dz()));
    n = std::clamp(n, 0, geometry.nz - 1);
    p.values[p.index(s.species, j, n)] += scale * s.strength * weight;
  }
  return p;
}

std::vector<PointScatterer> load_phantom(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_phantom: cannot open " + path);
  std::vector<PointScatterer> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    PointScatterer s;
    if (!(ls >> s.x)) continue;  // blank or comment-only line
    if (!(ls >> s.z >> s.species >> s.strength)) {
      std::ostringstream err;
      err << "load_phantom: malformed line " << lineno << " in " << path;
      throw ConfigError(err.str());
    }
    out.push_back(s);
  }
  return out;
}

void save_phantom(const std::string& path,
                  const std::vector<PointScatterer>& scatterers) {
  std::ofstream out(path);
  if (!out) throw ConfigError("save_phantom: cannot open " + path);
  out << "# x z species strength\n";
  out.precision(17);
  for (const auto& s : scatterers)
    out << s.x << " " << s.z << " " << s.species << " " << s.strength << "\n";
  if (!out) throw ConfigError("save_phantom: write failure on " + path);
}

}  // namespace spectom
