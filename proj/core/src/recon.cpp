#include "spectom/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spectom/parallel.hpp"
#include "spectom/rng.hpp"

namespace spectom {

void ReconConfig::validate() const {
  if (!(lambda_r > 0.0)) throw ConfigError("ReconConfig: lambda_r must be > 0");
  if (max_iters < 1) throw ConfigError("ReconConfig: max_iters must be >= 1");
  if (!(cg_tol >= 0.0)) throw ConfigError("ReconConfig: cg_tol must be >= 0");
  if (power_iters < 30)
    throw ConfigError("ReconConfig: power_iters must be >= 30");
}

namespace {

void check_shapes(const DensityStack& p, const MeasurementStack& s,
                  const SpectraMatrix& h, const KernelTable& table,
                  const char* who) {
  const auto& g = table.geometry;
  if (p.nx != g.nx || p.nz != g.nz || p.ns != static_cast<int>(h.cols()) ||
      s.nf != g.nf() || s.nx != g.nx || s.nk != g.nk ||
      static_cast<int>(h.rows()) != g.nk)
    throw ConfigError(std::string(who) + ": shape mismatch");
}

double regularizer_value(const DensityStack& p, Regularizer reg) {
  switch (reg) {
    case Regularizer::tikhonov: {
      double acc = 0.0;
      for (const Complex& v : p.values) acc += std::norm(v);
      return acc;
    }
    case Regularizer::l1: {
      double acc = 0.0;
      for (const Complex& v : p.values) acc += std::abs(v);
      return acc;
    }
    case Regularizer::group_l21: {
      double acc = 0.0;
      for (int s = 0; s < p.ns; ++s) {
        double block = 0.0;
        for (int q = 0; q < p.nx; ++q)
          for (int n = 0; n < p.nz; ++n) block += std::norm(p.at(s, q, n));
        acc += std::sqrt(block);
      }
      return acc;
    }
  }
  throw ConfigError("regularizer_value: unknown regularizer");
}

MeasurementStack residual_of(const DensityStack& p, const MeasurementStack& s,
                             const SpectraMatrix& h, const KernelTable& table) {
  MeasurementStack r = apply_forward(p, h, table);
  for (std::size_t i = 0; i < r.values.size(); ++i)
    r.values[i] -= s.values[i];
  return r;
}

}  // namespace

double objective(const DensityStack& p, const MeasurementStack& s,
                 const SpectraMatrix& h, const KernelTable& table,
                 const ReconConfig& config) {
  check_shapes(p, s, h, table, "objective");
  MeasurementStack r = residual_of(p, s, h, table);
  double fid = 0.0;
  for (const Complex& v : r.values) fid += std::norm(v);
  return 0.5 * fid + config.lambda_r * regularizer_value(p, config.regularizer);
}

double operator_norm_sq(const SpectraMatrix& h, const KernelTable& table,
                        int power_iters, std::uint64_t seed) {
  const auto& g = table.geometry;
  DensityStack v(static_cast<int>(h.cols()), g.nx, g.nz);
  SubstreamRng rng(seed, "power-iteration");
  for (Complex& c : v.values) c = Complex(rng.normal(), rng.normal());
  double nv = norm(v);
  if (nv == 0.0) throw NumericalError("operator_norm_sq: zero start vector");
  for (Complex& c : v.values) c /= nv;
  double l = 0.0;
  for (int it = 0; it < power_iters; ++it) {
    DensityStack w = apply_adjoint(apply_forward(v, h, table), h, table);
    l = norm(w);
    if (!(l > 0.0))
      throw NumericalError("operator_norm_sq: operator annihilated the iterate");
    for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] /= l;
    v = std::move(w);
  }
  return l;
}

ReconResult solve_tikhonov(const MeasurementStack& s, const SpectraMatrix& h,
                           const KernelTable& table, const ReconConfig& config) {
  config.validate();
  const auto& g = table.geometry;
  ReconResult out;
  out.densities = DensityStack(static_cast<int>(h.cols()), g.nx, g.nz);
  check_shapes(out.densities, s, h, table, "solve_tikhonov");

  const double lambda = config.lambda_r;
  const int ns = static_cast<int>(h.cols());
  // per-q series of ||residual||^2 and ||x||^2, entry 0 = initial state
  std::vector<std::vector<double>> resid2(g.nx), xnorm2(g.nx);

  parallel_for(g.nx, [&](int q) {
    BlockSystem op{h, table, q};
    CVector y(op.rows());
    for (int f = 0; f < g.nf(); ++f)
      y.segment(static_cast<Eigen::Index>(f) * g.nk, g.nk) = s.column(f, q);

    resid2[q].push_back(y.squaredNorm());
    xnorm2[q].push_back(0.0);

    CVector rhs = op.adjoint(y);
    double g0 = rhs.norm();
    if (g0 == 0.0) return;  // zero block: the exact solution is zero

    CVector x = CVector::Zero(op.cols());
    CVector r_data = y;
    CVector grad = rhs;
    CVector d = grad;
    double gg = grad.squaredNorm();
    for (int it = 0; it < config.max_iters; ++it) {
      CVector ad = op.apply(d);
      double denom = ad.squaredNorm() + lambda * d.squaredNorm();
      if (!(denom > 0.0)) break;
      double alpha = gg / denom;
      x += alpha * d;
      r_data -= alpha * ad;
      grad = op.adjoint(r_data) - lambda * x;
      double gg_new = grad.squaredNorm();
      if (!std::isfinite(gg_new))
        throw NumericalError("solve_tikhonov: non-finite iterate");
      resid2[q].push_back(r_data.squaredNorm());
      xnorm2[q].push_back(x.squaredNorm());
      if (std::sqrt(gg_new) <= config.cg_tol * g0) break;
      d = grad + (gg_new / gg) * d;
      gg = gg_new;
    }
    for (int sidx = 0; sidx < ns; ++sidx)
      out.densities.column(sidx, q) =
          x.segment(static_cast<Eigen::Index>(sidx) * g.nz, g.nz);
  });

  std::size_t max_len = 1;
  for (int q = 0; q < g.nx; ++q) max_len = std::max(max_len, resid2[q].size());
  out.iterations_run = static_cast<int>(max_len - 1);
  out.objective_trace.resize(out.iterations_run);
  for (int i = 0; i < out.iterations_run; ++i) {
    double fid = 0.0, reg = 0.0;
    for (int q = 0; q < g.nx; ++q) {
      std::size_t idx = std::min<std::size_t>(i + 1, resid2[q].size() - 1);
      fid += resid2[q][idx];
      reg += xnorm2[q][idx];
    }
    out.objective_trace[i] = 0.5 * fid + 0.5 * lambda * reg;
  }
  double fid_final = 0.0;
  for (int q = 0; q < g.nx; ++q) fid_final += resid2[q].back();
  out.residual_norm = std::sqrt(fid_final);
  return out;
}

namespace {

void prox_threshold(DensityStack& z, Regularizer reg, double tau) {
  if (reg == Regularizer::l1) {
    for (Complex& v : z.values) {
      double mag = std::abs(v);
      v = mag > tau ? v * ((mag - tau) / mag) : Complex(0.0, 0.0);
    }
    return;
  }
  // group_l21: one shrinkage factor per species block
  for (int s = 0; s < z.ns; ++s) {
    double block = 0.0;
    for (int q = 0; q < z.nx; ++q)
      for (int n = 0; n < z.nz; ++n) block += std::norm(z.at(s, q, n));
    double bn = std::sqrt(block);
    double factor = bn > tau ? (bn - tau) / bn : 0.0;
    for (int q = 0; q < z.nx; ++q)
      for (int n = 0; n < z.nz; ++n) z.at(s, q, n) *= factor;
  }
}

}  // namespace

ReconResult solve_fista(const MeasurementStack& s, const SpectraMatrix& h,
                        const KernelTable& table, const ReconConfig& config) {
  config.validate();
  if (config.regularizer == Regularizer::tikhonov)
    throw ConfigError("solve_fista: regularizer must be l1 or group_l21");
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  DensityStack x(ns, g.nx, g.nz);
  check_shapes(x, s, h, table, "solve_fista");

  const double big_l =
      1.05 * operator_norm_sq(h, table, config.power_iters, config.seed);
  const double step = 1.0 / big_l;
  const double tau = config.lambda_r * step;

  ReconResult out;
  DensityStack y = x;
  double t = 1.0;
  double f_prev = std::numeric_limits<double>::infinity();
  double resid_final = 0.0;

  for (int it = 0; it < config.max_iters; ++it) {
    MeasurementStack r = residual_of(y, s, h, table);
    DensityStack grad = apply_adjoint(r, h, table);
    DensityStack x_new = y;
    for (std::size_t i = 0; i < x_new.values.size(); ++i)
      x_new.values[i] -= step * grad.values[i];
    prox_threshold(x_new, config.regularizer, tau);

    MeasurementStack r_new = residual_of(x_new, s, h, table);
    double fid = 0.0;
    for (const Complex& v : r_new.values) fid += std::norm(v);
    double f = 0.5 * fid +
               config.lambda_r * regularizer_value(x_new, config.regularizer);
    if (!std::isfinite(f))
      throw NumericalError("solve_fista: non-finite objective");
    out.objective_trace.push_back(f);
    resid_final = std::sqrt(fid);

    if (f > f_prev) {
      // function-value restart: drop momentum, keep the new iterate
      t = 1.0;
      y = x_new;
    } else {
      double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      double beta = (t - 1.0) / t_new;
      y = x_new;
      for (std::size_t i = 0; i < y.values.size(); ++i)
        y.values[i] += beta * (x_new.values[i] - x.values[i]);
      t = t_new;
    }
    x = std::move(x_new);
    f_prev = std::min(f, f_prev);
  }
  out.densities = std::move(x);
  out.iterations_run = static_cast<int>(out.objective_trace.size());
  out.residual_norm = resid_final;
  return out;
}

DensityStack project_passband(const DensityStack& p,
                              const std::vector<PassbandBasis>& bases) {
  if (static_cast<int>(bases.size()) != p.nx)
    throw ConfigError("project_passband: need one basis per transverse block");
  DensityStack out = p;
  parallel_for(p.nx, [&](int q) {
    const CMatrix& v = bases[q].v;
    if (v.rows() != p.nz)
      throw ConfigError("project_passband: basis size mismatch");
    for (int s = 0; s < p.ns; ++s) {
      if (bases[q].r == 0) {
        out.column(s, q).setZero();
      } else {
        CVector c = v.adjoint() * p.column(s, q);
        out.column(s, q) = v * c;
      }
    }
  });
  return out;
}

}  // namespace spectom
