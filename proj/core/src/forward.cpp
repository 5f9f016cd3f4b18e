#include "spectom/forward.hpp"

#include <cmath>

#include "spectom/parallel.hpp"

namespace spectom {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ConfigError(msg);
}

void check_density(const DensityStack& p, const SpectraMatrix& h,
                   const KernelTable& table) {
  require(p.ns == static_cast<int>(h.cols()), "forward: species count mismatch");
  require(p.nx == table.geometry.nx, "forward: nx mismatch");
  require(p.nz == table.geometry.nz, "forward: nz mismatch");
  require(static_cast<int>(h.rows()) == table.geometry.nk,
          "forward: H rows must equal nk");
}

void check_measurement(const MeasurementStack& s, const SpectraMatrix& h,
                       const KernelTable& table) {
  require(s.nf == table.geometry.nf(), "forward: nf mismatch");
  require(s.nx == table.geometry.nx, "forward: nx mismatch");
  require(s.nk == table.geometry.nk, "forward: nk mismatch");
  require(static_cast<int>(h.rows()) == table.geometry.nk,
          "forward: H rows must equal nk");
}

//! DFT matrix W(q,j) = exp(-2*pi*i*q*j/n) (forward, unnormalized).
CMatrix dft_matrix(int n) {
  CMatrix w(n, n);
  for (int q = 0; q < n; ++q)
    for (int j = 0; j < n; ++j) {
      double ang = -2.0 * M_PI * static_cast<double>(q) * j / n;
      w(q, j) = Complex(std::cos(ang), std::sin(ang));
    }
  return w;
}

}  // namespace

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw ConfigError("khatri_rao: row-count mismatch");
  CMatrix out(a.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index p = 0; p < a.cols(); ++p)
      out.block(i, p * b.cols(), 1, b.cols()) = a(i, p) * b.row(i);
  return out;
}

MeasurementStack apply_forward(const DensityStack& p, const SpectraMatrix& h,
                               const KernelTable& table) {
  check_density(p, h, table);
  const auto& g = table.geometry;
  MeasurementStack out(g.nf(), g.nx, g.nk);
  parallel_for(g.nx, [&](std::size_t qi) {
    int q = static_cast<int>(qi);
    CMatrix pq(g.nz, p.ns);
    for (int s = 0; s < p.ns; ++s) pq.col(s) = p.column(s, q);
    for (int f = 0; f < g.nf(); ++f) {
      CMatrix t = table.block(f, q) * pq;  // nk x ns
      out.column(f, q) = (t.array() * h.array()).rowwise().sum();
    }
  });
  return out;
}

DensityStack apply_adjoint(const MeasurementStack& s, const SpectraMatrix& h,
                           const KernelTable& table) {
  check_measurement(s, h, table);
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  DensityStack out(ns, g.nx, g.nz);
  parallel_for(g.nx, [&](std::size_t qi) {
    int q = static_cast<int>(qi);
    CMatrix w = CMatrix::Zero(g.nz, ns);
    CMatrix u(g.nk, ns);
    for (int f = 0; f < g.nf(); ++f) {
      auto y = s.column(f, q);
      u = h.conjugate().array().colwise() * y.array();
      w.noalias() += table.block(f, q).adjoint() * u;
    }
    for (int sp = 0; sp < ns; ++sp) out.column(sp, q) = w.col(sp);
  });
  return out;
}

CMatrix assemble_block(int q, const SpectraMatrix& h, const KernelTable& table) {
  const auto& g = table.geometry;
  if (q < 0 || q >= g.nx) throw ConfigError("assemble_block: q out of range");
  require(static_cast<int>(h.rows()) == g.nk, "assemble_block: H rows must equal nk");
  const int ns = static_cast<int>(h.cols());
  CMatrix phi(static_cast<Eigen::Index>(g.nf()) * g.nk,
              static_cast<Eigen::Index>(ns) * g.nz);
  for (int f = 0; f < g.nf(); ++f) {
    auto a = table.block(f, q);
    for (int s = 0; s < ns; ++s)
      phi.block(static_cast<Eigen::Index>(f) * g.nk,
                static_cast<Eigen::Index>(s) * g.nz, g.nk, g.nz) =
          a.array().colwise() * h.col(s).array();
  }
  return phi;
}

CVector BlockSystem::apply(const CVector& x) const {
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  if (x.size() != cols()) throw ConfigError("BlockSystem: dimension mismatch");
  Eigen::Map<const CMatrix> pq(x.data(), g.nz, ns);
  CVector y(rows());
  for (int f = 0; f < g.nf(); ++f) {
    CMatrix t = table.block(f, q) * pq;
    y.segment(static_cast<Eigen::Index>(f) * g.nk, g.nk) =
        (t.array() * h.array()).rowwise().sum();
  }
  return y;
}

CVector BlockSystem::adjoint(const CVector& y) const {
  const auto& g = table.geometry;
  const int ns = static_cast<int>(h.cols());
  if (y.size() != rows()) throw ConfigError("BlockSystem: dimension mismatch");
  CMatrix w = CMatrix::Zero(g.nz, ns);
  for (int f = 0; f < g.nf(); ++f) {
    auto yf = y.segment(static_cast<Eigen::Index>(f) * g.nk, g.nk);
    CMatrix u = h.conjugate().array().colwise() * yf.array();
    w.noalias() += table.block(f, q).adjoint() * u;
  }
  return Eigen::Map<const CVector>(w.data(), w.size());
}

MeasurementStack measurements_to_fourier(const ScanData& spatial) {
  MeasurementStack out(spatial.nf, spatial.nx, spatial.nk);
  CMatrix w = dft_matrix(spatial.nx);
  for (int f = 0; f < spatial.nf; ++f) {
    Eigen::Map<const CMatrixRM> x(spatial.values.data() + spatial.index(f, 0, 0),
                                  spatial.nx, spatial.nk);
    Eigen::Map<CMatrixRM> y(out.values.data() + out.index(f, 0, 0), out.nx,
                            out.nk);
    y = w * x;
  }
  return out;
}

ScanData measurements_to_spatial(const MeasurementStack& fourier) {
  ScanData out(fourier.nf, fourier.nx, fourier.nk);
  CMatrix w = dft_matrix(fourier.nx).conjugate() / fourier.nx;
  for (int f = 0; f < fourier.nf; ++f) {
    Eigen::Map<const CMatrixRM> x(fourier.values.data() + fourier.index(f, 0, 0),
                                  fourier.nx, fourier.nk);
    Eigen::Map<CMatrixRM> y(out.values.data() + out.index(f, 0, 0), out.nx,
                            out.nk);
    y = w * x;
  }
  return out;
}

DensityStack density_to_fourier(const DensityStack& spatial) {
  DensityStack out(spatial.ns, spatial.nx, spatial.nz);
  CMatrix w = dft_matrix(spatial.nx);
  for (int s = 0; s < spatial.ns; ++s) {
    Eigen::Map<const CMatrixRM> x(spatial.values.data() + spatial.index(s, 0, 0),
                                  spatial.nx, spatial.nz);
    Eigen::Map<CMatrixRM> y(out.values.data() + out.index(s, 0, 0), out.nx,
                            out.nz);
    y = w * x;
  }
  return out;
}

DensityStack density_to_spatial(const DensityStack& fourier) {
  DensityStack out(fourier.ns, fourier.nx, fourier.nz);
  CMatrix w = dft_matrix(fourier.nx).conjugate() / fourier.nx;
  for (int s = 0; s < fourier.ns; ++s) {
    Eigen::Map<const CMatrixRM> x(fourier.values.data() + fourier.index(s, 0, 0),
                                  fourier.nx, fourier.nz);
    Eigen::Map<CMatrixRM> y(out.values.data() + out.index(s, 0, 0), out.nx,
                            out.nz);
    y = w * x;
  }
  return out;
}

namespace {
Complex dot_impl(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) throw ConfigError("dot: size mismatch");
  Complex acc(0, 0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}
}  // namespace

Complex dot(const DensityStack& a, const DensityStack& b) {
  return dot_impl(a.values, b.values);
}
Complex dot(const MeasurementStack& a, const MeasurementStack& b) {
  return dot_impl(a.values, b.values);
}
double norm(const DensityStack& a) {
  double s = 0;
  for (const auto& v : a.values) s += std::norm(v);
  return std::sqrt(s);
}
double norm(const MeasurementStack& a) {
  double s = 0;
  for (const auto& v : a.values) s += std::norm(v);
  return std::sqrt(s);
}

}  // namespace spectom
