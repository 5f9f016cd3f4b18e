#include "spectom/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "spectom/kernel.hpp"
#include "spectom/parallel.hpp"
#include "spectom/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "container payloads are written as little-endian host memory");

namespace spectom {

namespace {

using nlohmann::json;

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, 1); }

void put_u32(std::ostream& out, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
  put_bytes(out, b, 8);
}

void get_bytes(std::istream& in, void* data, std::size_t n, const char* what) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw ConfigError(std::string("cast_read: truncated ") + what);
}

std::uint8_t get_u8(std::istream& in, const char* what) {
  std::uint8_t v;
  get_bytes(in, &v, 1, what);
  return v;
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::uint8_t b[4];
  get_bytes(in, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  std::uint8_t b[8];
  get_bytes(in, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::uint64_t CastArray::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
      throw ConfigError("CastArray: dimension product overflow");
    n *= d;
  }
  return n;
}

void CastArray::validate() const {
  if (dims.empty() || dims.size() > 255)
    throw ConfigError("CastArray: ndim must be in [1, 255]");
  std::uint64_t n = element_count();
  std::uint64_t have = is_complex ? complexes.size() : reals.size();
  if (have != n)
    throw ConfigError("CastArray: payload length does not match dims");
  if (!is_valid_utf8(metadata))
    throw ConfigError("CastArray: metadata is not valid UTF-8");
}

void cast_write(const std::string& path, const CastArray& array) {
  array.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cast_write: cannot open " + path);
  put_bytes(out, "CAST", 4);
  put_u8(out, 1);
  put_u8(out, static_cast<std::uint8_t>(array.dims.size()));
  put_u8(out, array.is_complex ? 1 : 0);
  for (std::uint64_t d : array.dims) put_u64(out, d);
  if (array.is_complex)
    put_bytes(out, array.complexes.data(),
              array.complexes.size() * sizeof(Complex));
  else
    put_bytes(out, array.reals.data(), array.reals.size() * sizeof(double));
  if (array.metadata.size() > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("cast_write: metadata too large");
  put_u32(out, static_cast<std::uint32_t>(array.metadata.size()));
  put_bytes(out, array.metadata.data(), array.metadata.size());
  if (!out) throw ConfigError("cast_write: write failure on " + path);
}

CastArray cast_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cast_read: cannot open " + path);
  char magic[4];
  get_bytes(in, magic, 4, "magic");
  if (std::memcmp(magic, "CAST", 4) != 0)
    throw ConfigError("cast_read: bad magic in " + path);
  std::uint8_t version = get_u8(in, "version");
  if (version != 1) throw ConfigError("cast_read: unsupported version");
  std::uint8_t ndim = get_u8(in, "ndim");
  std::uint8_t dtype = get_u8(in, "dtype");
  if (dtype > 1) throw ConfigError("cast_read: unknown dtype code");
  if (ndim == 0) throw ConfigError("cast_read: ndim must be >= 1");
  CastArray a;
  a.is_complex = dtype == 1;
  a.dims.resize(ndim);
  for (auto& d : a.dims) d = get_u64(in, "dims");
  std::uint64_t n = a.element_count();
  if (n > (1ull << 32))
    throw BudgetError("cast_read: array too large for this reader");
  if (a.is_complex) {
    a.complexes.resize(n);
    get_bytes(in, a.complexes.data(), n * sizeof(Complex), "payload");
  } else {
    a.reals.resize(n);
    get_bytes(in, a.reals.data(), n * sizeof(double), "payload");
  }
  std::uint32_t meta_len = get_u32(in, "metadata length");
  a.metadata.resize(meta_len);
  if (meta_len) get_bytes(in, a.metadata.data(), meta_len, "metadata");
  if (!is_valid_utf8(a.metadata))
    throw ConfigError("cast_read: metadata is not valid UTF-8");
  return a;
}

bool is_valid_utf8(const std::string& text) {
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  std::size_t i = 0, n = text.size();
  while (i < n) {
    unsigned char c = s[i];
    int extra;
    unsigned cp_min;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp_min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp_min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp_min = 0x10000;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    unsigned cp = c & (0x3F >> extra);
    for (int k = 1; k <= extra; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    if (cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += extra + 1;
  }
  return true;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("hash_file: cannot open " + path);
  char buf[1 << 16];
  std::uint64_t h = 14695981039346656037ull;
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& data) {
  if (columns.size() != data.size())
    throw ConfigError("write_csv: one header per column required");
  std::size_t rows = data.empty() ? 0 : data.front().size();
  for (const auto& col : data)
    if (col.size() != rows) throw ConfigError("write_csv: ragged columns");
  std::ofstream out(path);
  if (!out) throw ConfigError("write_csv: cannot open " + path);
  out.precision(17);
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << (c ? "," : "") << columns[c];
  out << "\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c)
      out << (c ? "," : "") << data[c][r];
    out << "\n";
  }
  if (!out) throw ConfigError("write_csv: write failure on " + path);
}

namespace {

json geometry_to_json(const ImagingGeometry& g) {
  return json{{"nx", g.nx},
              {"nz", g.nz},
              {"nk", g.nk},
              {"lx", g.lx},
              {"lz", g.lz},
              {"kmin", g.kmin},
              {"kmax", g.kmax},
              {"na", g.na},
              {"focal_planes", g.focal_planes},
              {"power_spectrum", g.power_spectrum}};
}

ImagingGeometry geometry_from_json(const json& j) {
  ImagingGeometry g;
  g.nx = j.at("nx").get<int>();
  g.nz = j.at("nz").get<int>();
  g.nk = j.at("nk").get<int>();
  g.lx = j.at("lx").get<double>();
  g.lz = j.at("lz").get<double>();
  g.kmin = j.at("kmin").get<double>();
  g.kmax = j.at("kmax").get<double>();
  g.na = j.at("na").get<double>();
  g.focal_planes = j.at("focal_planes").get<std::vector<double>>();
  g.power_spectrum = j.at("power_spectrum").get<std::vector<double>>();
  return g;
}

}  // namespace

std::string geometry_to_json_text(const ImagingGeometry& geometry) {
  return geometry_to_json(geometry).dump();
}

ImagingGeometry geometry_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("geometry_from_json_text: invalid JSON: ") + e.what());
  }
  try {
    return geometry_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("geometry_from_json_text: missing or malformed field: ") +
                      e.what());
  }
}

void save_kernel_table(const std::string& path, const KernelTable& table) {
  const auto& g = table.geometry;
  CastArray a;
  a.is_complex = true;
  a.dims = {static_cast<std::uint64_t>(g.nf()), static_cast<std::uint64_t>(g.nx),
            static_cast<std::uint64_t>(g.nk), static_cast<std::uint64_t>(g.nz)};
  a.complexes = table.coefficients;
  json meta{{"kind", "kernel-table"},
            {"geometry", geometry_to_json(g)},
            {"geometry_hash", g.hash()},
            {"quadrature_nodes", table.quadrature_nodes}};
  a.metadata = meta.dump();
  cast_write(path, a);
}

KernelTable load_kernel_table(const std::string& path) {
  CastArray a = cast_read(path);
  if (!a.is_complex || a.dims.size() != 4)
    throw ConfigError("load_kernel_table: not a kernel table: " + path);
  json meta;
  try {
    meta = json::parse(a.metadata);
  } catch (const json::exception&) {
    throw ConfigError("load_kernel_table: unparseable metadata in " + path);
  }
  if (meta.value("kind", "") != "kernel-table")
    throw ConfigError("load_kernel_table: wrong container kind in " + path);
  KernelTable table;
  table.geometry = geometry_from_json(meta.at("geometry"));
  table.geometry.validate();
  table.quadrature_nodes = meta.at("quadrature_nodes").get<int>();
  if (meta.at("geometry_hash").get<std::uint64_t>() != table.geometry.hash())
    throw ConfigError("load_kernel_table: geometry hash mismatch in " + path);
  const auto& g = table.geometry;
  if (a.dims[0] != static_cast<std::uint64_t>(g.nf()) ||
      a.dims[1] != static_cast<std::uint64_t>(g.nx) ||
      a.dims[2] != static_cast<std::uint64_t>(g.nk) ||
      a.dims[3] != static_cast<std::uint64_t>(g.nz))
    throw ConfigError("load_kernel_table: dims disagree with geometry");
  table.coefficients = std::move(a.complexes);
  return table;
}

KernelTable load_or_build_kernel_table(const ImagingGeometry& geometry,
                                       int quadrature_nodes,
                                       const std::string& cache_path) {
  if (!cache_path.empty()) {
    std::ifstream probe(cache_path, std::ios::binary);
    if (probe) {
      probe.close();
      try {
        KernelTable t = load_kernel_table(cache_path);
        if (t.geometry.hash() == geometry.hash() &&
            t.quadrature_nodes == quadrature_nodes)
          return t;
      } catch (const std::runtime_error&) {
        // stale or foreign cache: fall through and rebuild
      }
    }
  }
  KernelTable t = build_kernel_table(geometry, quadrature_nodes);
  if (!cache_path.empty()) save_kernel_table(cache_path, t);
  return t;
}

SvScan sv_scan(const SpectraMatrix& h, const KernelTable& table,
               const std::vector<int>& q_list, const SvScanOptions& options,
               const std::vector<std::string>& species_names) {
  const auto& g = table.geometry;
  if (!options.kernel_only && static_cast<int>(h.rows()) != g.nk)
    throw ConfigError("sv_scan: spectra rows must equal nk");
  SvScan scan;
  scan.q_list = q_list;
  scan.spectra.resize(q_list.size());
  scan.geometry_hash = g.hash();
  scan.na = g.na;
  scan.nf = g.nf();
  scan.normalized = options.normalize;
  scan.kernel_only = options.kernel_only;
  scan.species_names = species_names;

  long rows = static_cast<long>(g.nf()) * g.nk;
  long cols = options.kernel_only ? g.nz : static_cast<long>(h.cols()) * g.nz;
  if (rows * cols > options.budget)
    throw BudgetError("sv_scan: dense block exceeds assembly budget");

  parallel_for(q_list.size(), [&](std::size_t i) {
    int q = q_list[i];
    if (q < 0 || q >= g.nx) throw ConfigError("sv_scan: q out of range");
    CMatrix block = options.kernel_only ? CMatrix(stacked_kernel(table, q))
                                        : assemble_block(q, h, table);
    Eigen::BDCSVD<CMatrix> svd(block);
    RVector sv = svd.singularValues();
    if (options.normalize && sv.size() > 0 && sv[0] > 0.0) sv /= sv[0];
    scan.spectra[i] = std::move(sv);
  });
  return scan;
}

SvEnsemble sv_ensemble(const SpectralLibrary& library, int ns,
                       const KernelTable& table, const std::vector<int>& nf_list,
                       int trials, std::uint64_t seed) {
  const auto& g = table.geometry;
  const int pool = static_cast<int>(library.profiles.size());
  if (pool < ns) throw ConfigError("sv_ensemble: library smaller than Ns");
  if (ns < 1) throw ConfigError("sv_ensemble: Ns must be >= 1");
  if (trials < 1) throw ConfigError("sv_ensemble: trials must be >= 1");
  if (static_cast<int>(library.wavenumbers.size()) != g.nk)
    throw ConfigError("sv_ensemble: library wavenumber grid must equal nk");
  for (int nf : nf_list)
    if (nf < 1 || nf > g.nf())
      throw ConfigError("sv_ensemble: nf entries must lie in [1, table nf]");

  // per (nf, trial) spectra, reduced to envelopes afterwards
  std::vector<std::vector<RVector>> all(nf_list.size(),
                                        std::vector<RVector>(trials));
  parallel_for(trials, [&](std::size_t trial) {
    SubstreamRng rng(seed, "sv-ensemble", trial);
    std::vector<int> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    for (int t = 0; t < ns; ++t)
      std::swap(idx[t], idx[t + static_cast<int>(rng.below(pool - t))]);
    SpectraMatrix h(g.nk, ns);
    for (int s = 0; s < ns; ++s) {
      const auto& vals = library.profiles[idx[s]].values;
      for (int m = 0; m < g.nk; ++m) h(m, s) = vals[m];
    }
    CMatrix phi0 = assemble_block(0, h, table);
    for (std::size_t fi = 0; fi < nf_list.size(); ++fi) {
      CMatrix sub = phi0.topRows(static_cast<Eigen::Index>(nf_list[fi]) * g.nk);
      Eigen::BDCSVD<CMatrix> svd(sub);
      RVector sv = svd.singularValues();
      if (sv.size() > 0 && sv[0] > 0.0) sv /= sv[0];
      all[fi][trial] = std::move(sv);
    }
  });

  SvEnsemble env;
  env.nf_list = nf_list;
  env.trials = trials;
  env.seed = seed;
  env.min_envelope.resize(nf_list.size());
  env.max_envelope.resize(nf_list.size());
  for (std::size_t fi = 0; fi < nf_list.size(); ++fi) {
    RVector lo = all[fi][0], hi = all[fi][0];
    for (int t = 1; t < trials; ++t) {
      lo = lo.cwiseMin(all[fi][t]);
      hi = hi.cwiseMax(all[fi][t]);
    }
    env.min_envelope[fi] = std::move(lo);
    env.max_envelope[fi] = std::move(hi);
  }
  return env;
}

namespace {

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pix,
               int width, int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("render_images: cannot open " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  put_bytes(out, pix.data(), pix.size());
  if (!out) throw ConfigError("render_images: write failure on " + path);
}

void write_ppm(const std::string& path, const std::vector<std::uint8_t>& pix,
               int width, int height) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("render_images: cannot open " + path);
  out << "P6\n" << width << " " << height << "\n255\n";
  put_bytes(out, pix.data(), pix.size());
  if (!out) throw ConfigError("render_images: write failure on " + path);
}

}  // namespace

std::vector<std::string> render_images(const DensityStack& densities,
                                       const std::vector<int>& rgb_mapping,
                                       ImageTransform transform,
                                       const std::string& prefix) {
  if (!rgb_mapping.empty() && rgb_mapping.size() != 3)
    throw ConfigError("render_images: rgb mapping needs exactly 3 entries");
  for (std::size_t a = 0; a < rgb_mapping.size(); ++a) {
    if (rgb_mapping[a] >= densities.ns)
      throw ConfigError("render_images: mapped species out of range");
    for (std::size_t b = a + 1; b < rgb_mapping.size(); ++b)
      if (rgb_mapping[a] >= 0 && rgb_mapping[a] == rgb_mapping[b])
        throw ConfigError("render_images: species mapped to two channels");
  }

  DensityStack spatial = density_to_spatial(densities);
  const int nx = spatial.nx, nz = spatial.nz;
  // per-species value maps, rows = depth, columns = transverse position
  std::vector<std::vector<double>> maps(spatial.ns);
  std::vector<double> peaks(spatial.ns, 0.0);
  for (int s = 0; s < spatial.ns; ++s) {
    maps[s].assign(static_cast<std::size_t>(nz) * nx, 0.0);
    for (int n = 0; n < nz; ++n)
      for (int j = 0; j < nx; ++j) {
        double v = std::abs(spatial.at(s, j, n));
        if (transform == ImageTransform::magnitude_sq) v *= v;
        maps[s][static_cast<std::size_t>(n) * nx + j] = v;
        peaks[s] = std::max(peaks[s], v);
      }
  }

  std::vector<std::string> written;
  for (int s = 0; s < spatial.ns; ++s) {
    std::vector<std::uint8_t> pix(maps[s].size());
    double scale = peaks[s] > 0.0 ? 255.0 / peaks[s] : 0.0;
    for (std::size_t i = 0; i < pix.size(); ++i)
      pix[i] = static_cast<std::uint8_t>(std::lround(maps[s][i] * scale));
    std::ostringstream name;
    name << prefix << "_species" << s << ".pgm";
    write_pgm(name.str(), pix, nx, nz);
    written.push_back(name.str());
  }

  if (!rgb_mapping.empty()) {
    std::vector<std::uint8_t> pix(static_cast<std::size_t>(nz) * nx * 3, 0);
    for (int c = 0; c < 3; ++c) {
      int s = rgb_mapping[c];
      if (s < 0) continue;
      double scale = peaks[s] > 0.0 ? 255.0 / peaks[s] : 0.0;
      for (std::size_t i = 0; i < maps[s].size(); ++i)
        pix[3 * i + c] = static_cast<std::uint8_t>(std::lround(maps[s][i] * scale));
    }
    std::string name = prefix + "_rgb.ppm";
    write_ppm(name, pix, nx, nz);
    written.push_back(name);
  }
  return written;
}

}  // namespace spectom
