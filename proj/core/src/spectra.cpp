#include "spectom/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "spectom/rng.hpp"

namespace spectom {

void SpectralLibrary::validate() const {
  if (nk() < 2) throw ConfigError("spectra: wavenumber grid needs >= 2 samples");
  double dk = wavenumbers[1] - wavenumbers[0];
  if (!(dk > 0.0)) throw ConfigError("spectra: wavenumbers must be strictly increasing");
  for (int i = 1; i < nk(); ++i) {
    double step = wavenumbers[i] - wavenumbers[i - 1];
    if (!(step > 0.0))
      throw ConfigError("spectra: wavenumbers must be strictly increasing");
    if (std::abs(step - dk) > 1e-9 * std::max(1.0, std::abs(dk)))
      throw ConfigError("spectra: wavenumber spacing must be uniform");
  }
  for (const auto& p : profiles) {
    if (p.values.size() != wavenumbers.size())
      throw ConfigError("spectra: profile '" + p.name + "' length mismatch");
    if (p.kind == ProfileKind::physical) {
      for (int i = 0; i < p.values.size(); ++i)
        if (p.values[i].imag() < 0.0)
          throw ConfigError("spectra: physical profile '" + p.name +
                            "' has negative imaginary part");
    }
  }
}

Complex susceptibility_from_index(double n_r, double kappa) {
  return {n_r * n_r - kappa * kappa - 1.0, 2.0 * n_r * kappa};
}

SpectralProfile synth_lorentzian(std::uint64_t seed, int n_oscillators,
                                 Range sigma0_range, Range sigma_range,
                                 Range nu_range, Range gamma_range,
                                 const RVector& wavenumbers) {
  if (n_oscillators < 0) throw ConfigError("synth_lorentzian: n_oscillators < 0");
  if (wavenumbers.size() == 0) throw ConfigError("synth_lorentzian: empty wavenumber grid");
  SubstreamRng rng(seed, "synth-lorentzian");
  double sigma0 = rng.uniform(sigma0_range.first, sigma0_range.second);
  std::vector<double> sigma(n_oscillators), nu(n_oscillators), gamma(n_oscillators);
  for (int n = 0; n < n_oscillators; ++n) {
    sigma[n] = rng.uniform(sigma_range.first, sigma_range.second);
    nu[n] = rng.uniform(nu_range.first, nu_range.second);
    gamma[n] = rng.uniform(gamma_range.first, gamma_range.second);
  }
  SpectralProfile prof;
  prof.name = "lorentzian-" + std::to_string(seed);
  prof.kind = ProfileKind::physical;
  prof.values.resize(wavenumbers.size());
  for (int i = 0; i < wavenumbers.size(); ++i) {
    double k0 = wavenumbers[i];
    Complex acc(sigma0, 0.0);
    for (int n = 0; n < n_oscillators; ++n)
      acc += sigma[n] / Complex(nu[n] * nu[n] - k0 * k0, -gamma[n] * k0);
    prof.values[i] = acc;
  }
  return prof;
}

SpectralProfile synth_lorentzian(std::uint64_t seed, const RVector& wavenumbers) {
  return synth_lorentzian(seed, 99, {0.0, 0.1}, {0.0, 0.1},
                          {1.2 * M_PI, 4.4 * M_PI},
                          {2.0 * M_PI * 1e-3, 4.0 * M_PI * 1e-2}, wavenumbers);
}

SpectralProfile random_profile(std::uint64_t seed, int nk) {
  if (nk < 1) throw ConfigError("random_profile: nk must be >= 1");
  SubstreamRng rng(seed, "random-profile");
  SpectralProfile prof;
  prof.name = "random-" + std::to_string(seed);
  prof.kind = ProfileKind::synthetic_random;
  prof.values.resize(nk);
  for (int i = 0; i < nk; ++i) {
    double re = rng.normal();
    double im = rng.uniform();
    prof.values[i] = Complex(re, im);
  }
  return prof;
}

SpectraMatrix build_H(const SpectralLibrary& library,
                      const std::vector<int>& selection) {
  std::set<int> seen;
  for (int s : selection) {
    if (s < 0 || s >= library.size())
      throw ConfigError("build_H: selection index out of range");
    if (!seen.insert(s).second)
      throw ConfigError("build_H: duplicate selection index");
  }
  SpectraMatrix H(library.nk(), static_cast<int>(selection.size()));
  for (int s = 0; s < static_cast<int>(selection.size()); ++s)
    H.col(s) = library.profiles[selection[s]].values;
  return H;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

SpectralLibrary load_spectra_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("spectra csv: empty file");
  auto cols = split_csv_line(header);
  if (cols.empty() || cols[0] != "k0")
    throw ConfigError("spectra csv: first column must be 'k0'");
  if (cols.size() < 3 || (cols.size() - 1) % 2 != 0)
    throw ConfigError("spectra csv: expected pairs of <name>_re,<name>_im columns");
  int ns = static_cast<int>((cols.size() - 1) / 2);
  std::vector<std::string> names(ns);
  for (int s = 0; s < ns; ++s) {
    const std::string& re = cols[1 + 2 * s];
    const std::string& im = cols[2 + 2 * s];
    auto strip = [](const std::string& c, const char* suffix) {
      std::string suf(suffix);
      if (c.size() <= suf.size() || c.substr(c.size() - suf.size()) != suf)
        throw ConfigError("spectra csv: column '" + c + "' lacks expected suffix");
      return c.substr(0, c.size() - suf.size());
    };
    names[s] = strip(re, "_re");
    if (strip(im, "_im") != names[s])
      throw ConfigError("spectra csv: mismatched re/im column pair at '" + re + "'");
  }
  std::vector<double> ks;
  std::vector<std::vector<Complex>> vals(ns);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != cols.size())
      throw ConfigError("spectra csv: row with wrong field count");
    try {
      ks.push_back(std::stod(fields[0]));
      for (int s = 0; s < ns; ++s)
        vals[s].emplace_back(std::stod(fields[1 + 2 * s]), std::stod(fields[2 + 2 * s]));
    } catch (const std::exception&) {
      throw ConfigError("spectra csv: unparsable numeric field");
    }
  }
  SpectralLibrary lib;
  lib.wavenumbers = Eigen::Map<const RVector>(ks.data(), static_cast<int>(ks.size()));
  for (int s = 0; s < ns; ++s) {
    SpectralProfile p;
    p.name = names[s];
    p.kind = ProfileKind::physical;
    p.values = Eigen::Map<const CVector>(vals[s].data(), static_cast<int>(vals[s].size()));
    lib.profiles.push_back(std::move(p));
  }
  lib.validate();
  return lib;
}

SpectralLibrary load_spectra_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spectra csv: cannot open " + path);
  return load_spectra_csv(in);
}

void save_spectra_csv(const SpectralLibrary& library, std::ostream& out) {
  out << "k0";
  for (const auto& p : library.profiles) out << "," << p.name << "_re," << p.name << "_im";
  out << "\n";
  out << std::setprecision(17);
  for (int i = 0; i < library.nk(); ++i) {
    out << library.wavenumbers[i];
    for (const auto& p : library.profiles)
      out << "," << p.values[i].real() << "," << p.values[i].imag();
    out << "\n";
  }
}

void save_spectra_csv(const SpectralLibrary& library, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("spectra csv: cannot write " + path);
  save_spectra_csv(library, out);
}

SpectralLibrary resample_library(const SpectralLibrary& library,
                                 const RVector& target_wavenumbers) {
  library.validate();
  double lo = library.wavenumbers[0];
  double hi = library.wavenumbers[library.nk() - 1];
  SpectralLibrary out;
  out.wavenumbers = target_wavenumbers;
  for (const auto& p : library.profiles) {
    SpectralProfile q;
    q.name = p.name;
    q.kind = p.kind;
    q.values.resize(target_wavenumbers.size());
    for (int i = 0; i < target_wavenumbers.size(); ++i) {
      double k = target_wavenumbers[i];
      if (k < lo || k > hi)
        throw ConfigError("resample_library: target wavenumber outside library grid");
      int j = static_cast<int>((k - lo) / (library.wavenumbers[1] - lo));
      if (j >= library.nk() - 1) j = library.nk() - 2;
      double k0 = library.wavenumbers[j], k1 = library.wavenumbers[j + 1];
      double t = (k - k0) / (k1 - k0);
      q.values[i] = (1.0 - t) * p.values[j] + t * p.values[j + 1];
    }
    out.profiles.push_back(std::move(q));
  }
  return out;
}

}  // namespace spectom
