#include "spectom/kernel.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "spectom/parallel.hpp"

namespace spectom {

double kz(double k_perp, double k0) {
  if (std::abs(k_perp) > k0)
    throw NumericalError("kz: evanescent input |k_perp| > k0");
  return std::sqrt(k0 * k0 - k_perp * k_perp);
}

int effective_rank(double lz, double kmin, double kmax) {
  if (!(kmax > kmin) || !(lz > 0.0))
    throw ConfigError("effective_rank: requires lz > 0 and kmax > kmin");
  return static_cast<int>(std::lround(lz * (kmax - kmin) / M_PI));
}

bool passband_contains(double kx, double kz0, double kmin, double kmax,
                       double na) {
  if (!(kz0 < 0.0)) return false;
  double k0 = 0.5 * std::hypot(kx, kz0);
  if (k0 < kmin || k0 > kmax) return false;
  return kx * kx <= 4.0 * k0 * k0 * na * na;
}

const GaussLegendre& gauss_legendre(int nodes) {
  if (nodes < 2) throw ConfigError("gauss_legendre: nodes must be >= 2");
  static std::mutex mtx;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(nodes);
  if (it != cache.end()) return it->second;

  GaussLegendre rule;
  rule.x.resize(nodes);
  rule.w.resize(nodes);
  int half = (nodes + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (nodes + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= nodes; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = nodes * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= nodes; ++j) {
      double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = nodes * (x * p1 - p0) / (x * x - 1.0);
    rule.x[i] = -x;
    rule.x[nodes - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.w[i] = w;
    rule.w[nodes - 1 - i] = w;
  }
  return cache.emplace(nodes, std::move(rule)).first->second;
}

namespace {

struct ThetaInterval {
  double lo, hi;
};

// Integration interval in theta after k' = k0 sin(theta).
ThetaInterval theta_interval(double kx, double k0) {
  double lo = std::asin(std::max(-1.0, kx / k0 - 1.0));
  double hi = std::asin(std::min(1.0, kx / k0 + 1.0));
  return {lo, hi};
}

}  // namespace

Complex isam_kernel_point(double k_perp, double z, double k0, double na,
                          double pk2, int nodes) {
  if (!std::isfinite(k_perp) || !std::isfinite(z) || !std::isfinite(k0) ||
      !std::isfinite(na) || !std::isfinite(pk2))
    throw NumericalError("isam_kernel_point: non-finite input");
  if (nodes < 2) throw ConfigError("isam_kernel_point: nodes must be >= 2");
  if (pk2 == 0.0 || std::abs(k_perp) >= 2.0 * k0) return {0.0, 0.0};

  const GaussLegendre& rule = gauss_legendre(nodes);
  auto [lo, hi] = theta_interval(k_perp, k0);
  double mid = 0.5 * (lo + hi), halfw = 0.5 * (hi - lo);
  double inv_pupil = 1.0 / (k0 * na * k0 * na);
  double sr = 0.0, si = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double th = mid + halfw * rule.x[j];
    double kp = k0 * std::sin(th);
    double kz1 = k0 * std::cos(th);
    double d = k_perp - kp;
    double kz2 = std::sqrt(std::max(0.0, k0 * k0 - d * d));
    double amp = rule.w[j] * std::exp(-(kp * kp + d * d) * inv_pupil);
    double ph = z * (kz1 + kz2);
    sr += amp * std::cos(ph);
    si += amp * std::sin(ph);
  }
  double pref = pk2 * inv_pupil * halfw;
  return {pref * sr, pref * si};
}

KernelTable build_kernel_table(const ImagingGeometry& geometry, int nodes) {
  geometry.validate();
  if (nodes < 2) throw ConfigError("build_kernel_table: nodes must be >= 2");
  const GaussLegendre& rule = gauss_legendre(nodes);

  KernelTable table;
  table.geometry = geometry;
  table.quadrature_nodes = nodes;
  const int nx = geometry.nx, nz = geometry.nz, nk = geometry.nk,
            nf = geometry.nf();
  table.coefficients.assign(static_cast<std::size_t>(nf) * nx * nk * nz,
                            Complex(0.0, 0.0));

  const int half = nx / 2;
  const double dz = geometry.dz();

  // Pure map over (f, q<=nx/2, m); (nx-q) is a mirror copy afterwards.
  parallel_for(static_cast<std::size_t>(half) + 1, [&](std::size_t qi) {
    int q = static_cast<int>(qi);
    double kx = geometry.kx(q);
    std::vector<double> amp(nodes), vr(nodes), vi(nodes), str(nodes), sti(nodes);
    for (int f = 0; f < nf; ++f) {
      double zf = geometry.focal_planes[f];
      for (int m = 0; m < nk; ++m) {
        double k0 = geometry.wavenumber(m);
        double pk2 = geometry.pk2(m);
        Complex* row = table.coefficients.data() + table.index(f, q, m, 0);
        if (pk2 == 0.0 || std::abs(kx) >= 2.0 * k0) continue;  // exact zeros
        auto [lo, hi] = theta_interval(kx, k0);
        double mid = 0.5 * (lo + hi), halfw = 0.5 * (hi - lo);
        double ip = 1.0 / (k0 * geometry.na * k0 * geometry.na);
        double pref = pk2 * ip * halfw;
        double z0 = -zf;
        for (int j = 0; j < nodes; ++j) {
          double th = mid + halfw * rule.x[j];
          double kp = k0 * std::sin(th);
          double kz1 = k0 * std::cos(th);
          double d = kx - kp;
          double kz2 = std::sqrt(std::max(0.0, k0 * k0 - d * d));
          double freq = kz1 + kz2;
          amp[j] = rule.w[j] * std::exp(-(kp * kp + d * d) * ip);
          vr[j] = std::cos(z0 * freq);
          vi[j] = std::sin(z0 * freq);
          str[j] = std::cos(dz * freq);
          sti[j] = std::sin(dz * freq);
        }
        // Axial phases advance by a complex rotation per z step; the
        // accumulated drift over <=Nz steps is ~1e-13, far below the
        // quadrature convergence contract.
        for (int n = 0; n < nz; ++n) {
          double sr = 0.0, si = 0.0;
          for (int j = 0; j < nodes; ++j) {
            sr += amp[j] * vr[j];
            si += amp[j] * vi[j];
            double nr = vr[j] * str[j] - vi[j] * sti[j];
            vi[j] = vr[j] * sti[j] + vi[j] * str[j];
            vr[j] = nr;
          }
          row[n] = Complex(pref * sr, pref * si);
        }
      }
    }
  });

  // Mirror: the integrand is even in kx, so q and nx-q coincide.
  for (int f = 0; f < nf; ++f)
    for (int q = 1; q < half; ++q) {
      Complex* src = table.coefficients.data() + table.index(f, q, 0, 0);
      Complex* dst = table.coefficients.data() + table.index(f, nx - q, 0, 0);
      std::copy(src, src + static_cast<std::size_t>(nk) * nz, dst);
    }
  return table;
}

CMatrix stacked_kernel(const KernelTable& table, int q) {
  const auto& g = table.geometry;
  if (q < 0 || q >= g.nx) throw ConfigError("stacked_kernel: q out of range");
  CMatrix out(static_cast<Eigen::Index>(g.nf()) * g.nk, g.nz);
  for (int f = 0; f < g.nf(); ++f)
    out.middleRows(static_cast<Eigen::Index>(f) * g.nk, g.nk) = table.block(f, q);
  return out;
}

}  // namespace spectom
