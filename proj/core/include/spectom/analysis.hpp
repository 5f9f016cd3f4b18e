#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectom/forward.hpp"
#include "spectom/spectra.hpp"
#include "spectom/types.hpp"

namespace spectom {

//! Minimal binary array container ("CAST"): magic 'CAST', version 1,
//! ndim u8, dtype u8 (0 = real f64, 1 = complex c128), dims as u64
//! little-endian, row-major little-endian payload, then a UTF-8 metadata
//! block prefixed by its u32 byte length.
struct CastArray {
  std::vector<std::uint64_t> dims;
  bool is_complex = false;
  std::vector<double> reals;       //!< payload when !is_complex
  std::vector<Complex> complexes;  //!< payload when is_complex
  std::string metadata;            //!< UTF-8, caller-defined (JSON by convention)

  std::uint64_t element_count() const;
  void validate() const;
};

void cast_write(const std::string& path, const CastArray& array);
CastArray cast_read(const std::string& path);

//! FNV-1a over a whole file, for provenance manifests.
std::uint64_t hash_file(const std::string& path);

//! UTF-8 well-formedness check (used for metadata validation).
bool is_valid_utf8(const std::string& text);

//! CSV with header row, '.' decimal, 17 significant digits.
void write_csv(const std::string& path,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& data);

//! Geometry serialization used inside container metadata (JSON object text).
std::string geometry_to_json_text(const ImagingGeometry& geometry);
ImagingGeometry geometry_from_json_text(const std::string& text);

//! Kernel-table persistence in CAST (dims nf x nx x nk x nz, geometry and
//! node count in JSON metadata, keyed by the geometry hash).
void save_kernel_table(const std::string& path, const KernelTable& table);
KernelTable load_kernel_table(const std::string& path);
//! Loads `cache_path` when it matches (geometry hash, nodes); otherwise
//! builds and, when `cache_path` is non-empty, saves.
KernelTable load_or_build_kernel_table(const ImagingGeometry& geometry,
                                       int quadrature_nodes,
                                       const std::string& cache_path);

struct SvScanOptions {
  bool normalize = false;    //!< divide each spectrum by its largest value
  bool kernel_only = false;  //!< scan stacked kernel blocks instead of Phi^q
  long budget = 8'000'000;   //!< dense entries allowed per assembled block
};

struct SvScan {
  std::vector<int> q_list;
  std::vector<RVector> spectra;  //!< non-negative, non-increasing per q
  std::uint64_t geometry_hash = 0;
  double na = 0.0;
  int nf = 0;
  bool normalized = false;
  bool kernel_only = false;
  std::vector<std::string> species_names;
};

SvScan sv_scan(const SpectraMatrix& h, const KernelTable& table,
               const std::vector<int>& q_list, const SvScanOptions& options = {},
               const std::vector<std::string>& species_names = {});

//! Ensemble singular-value envelopes of the q = 0 block over random
//! Ns-subsets of a spectral library, for each focal-plane count in nf_list
//! (using the first nf focal planes of the table). Spectra are normalized
//! to unit spectral norm before aggregation.
struct SvEnsemble {
  std::vector<int> nf_list;
  std::vector<RVector> min_envelope;  //!< per nf, worst realization per index
  std::vector<RVector> max_envelope;  //!< per nf, best realization per index
  int trials = 0;
  std::uint64_t seed = 0;
};

SvEnsemble sv_ensemble(const SpectralLibrary& library, int ns,
                       const KernelTable& table, const std::vector<int>& nf_list,
                       int trials, std::uint64_t seed);

enum class ImageTransform { magnitude, magnitude_sq };

//! Renders spatial-domain images from a transverse-DFT density stack:
//! one max-normalized 8-bit grayscale PGM per species plus one composite
//! PPM with rgb_mapping = {r species, g species, b species} (-1 = empty
//! channel). Rows follow depth (z), columns the transverse axis (x).
//! Returns the written paths.
std::vector<std::string> render_images(const DensityStack& densities,
                                       const std::vector<int>& rgb_mapping,
                                       ImageTransform transform,
                                       const std::string& prefix);

}  // namespace spectom
