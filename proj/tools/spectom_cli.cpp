//! spectom: command-line pipeline over the spectroscopic-tomography library.
//!
//! Subcommands: kernel-build, synth-spectra, simulate, reconstruct,
//! audit-uniqueness, sv-scan, sv-ensemble, render. Every run writes its
//! outputs into a run directory together with a manifest recording the
//! effective configuration, the seed, and FNV-1a hashes of all inputs and
//! outputs. Manifests contain no timestamps, so identical configurations
//! produce identical manifests.
//!
//! Exit codes: 0 success, 1 invalid configuration or input file,
//! 2 numerical failure, 3 budget exceeded.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spectom/analysis.hpp"
#include "spectom/forward.hpp"
#include "spectom/geometry.hpp"
#include "spectom/kernel.hpp"
#include "spectom/parallel.hpp"
#include "spectom/recon.hpp"
#include "spectom/scatter.hpp"
#include "spectom/spectra.hpp"
#include "spectom/types.hpp"
#include "spectom/uniqueness.hpp"

#ifndef SPECTOM_VERSION
#define SPECTOM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spectom;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

//! Collects provenance for one run and writes <run-dir>/manifest.json.
struct RunManifest {
  fs::path dir;
  std::string command;
  std::string config_ini;
  std::uint64_t seed = 0;
  bool has_seed = false;
  json inputs = json::object();
  json outputs = json::object();

  void add_input(const std::string& path) { inputs[path] = hash_hex(hash_file(path)); }
  void add_output(const std::string& path) { outputs[path] = hash_hex(hash_file(path)); }

  void write() const {
    json m{{"command", command},
           {"config", config_ini},
           {"inputs", inputs},
           {"outputs", outputs},
           {"version", SPECTOM_VERSION}};
    if (has_seed) m["seed"] = seed;
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path.string());
    out << m.dump(2) << "\n";
  }
};

//! Output file names resolve inside the run directory unless absolute.
std::string in_run_dir(const fs::path& dir, const std::string& name) {
  fs::path p(name);
  if (p.is_absolute()) return p.string();
  return (dir / p).string();
}

fs::path make_run_dir(const std::string& run_dir) {
  fs::path dir(run_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create run directory " + dir.string() + ": " + ec.message());
  return dir;
}

// ---------------------------------------------------------------------------
// Geometry options shared by the subcommands that build kernel tables.

struct GeometryCli {
  int nx = 64;
  int nz = 96;
  int nk = 96;
  double lx = 50.0;
  double lz = 40.0;
  double kmin = 0.7;
  double kmax = 2.1;
  double na = 0.5;
  std::vector<double> focal{10.0, 20.0, 30.0};
  std::vector<double> power_spectrum;  // empty = flat
};

void add_geometry_options(CLI::App* cmd, GeometryCli& g) {
  cmd->add_option("--nx", g.nx, "Transverse scan samples (even)")->capture_default_str();
  cmd->add_option("--nz", g.nz, "Axial samples")->capture_default_str();
  cmd->add_option("--nk", g.nk, "Wavenumber samples")->capture_default_str();
  cmd->add_option("--lx", g.lx, "Transverse extent, um")->capture_default_str();
  cmd->add_option("--lz", g.lz, "Axial extent, um")->capture_default_str();
  cmd->add_option("--kmin", g.kmin, "Lowest wavenumber, rad/um")->capture_default_str();
  cmd->add_option("--kmax", g.kmax, "Highest wavenumber, rad/um")->capture_default_str();
  cmd->add_option("--na", g.na, "Numerical aperture, in (0,1)")->capture_default_str();
  cmd->add_option("--focal", g.focal, "Focal-plane depths, um (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--power-spectrum", g.power_spectrum,
                  "Source power spectrum |P(k0)|^2, one value per wavenumber "
                  "(comma separated); omit for flat")
      ->delimiter(',');
}

ImagingGeometry build_geometry(const GeometryCli& g) {
  ImagingGeometry geom;
  geom.nx = g.nx;
  geom.nz = g.nz;
  geom.nk = g.nk;
  geom.lx = g.lx;
  geom.lz = g.lz;
  geom.kmin = g.kmin;
  geom.kmax = g.kmax;
  geom.na = g.na;
  geom.focal_planes = g.focal;
  geom.power_spectrum = g.power_spectrum;
  for (const auto& w : geom.validate()) std::cerr << "warning: " << w << "\n";
  return geom;
}

// ---------------------------------------------------------------------------
// Small parsing / loading helpers.

//! "all", "3", "0-7", or comma-joined mixtures of the latter two.
std::vector<int> parse_q_list(const std::string& text, int nx) {
  std::vector<int> qs;
  if (text == "all") {
    qs.resize(nx);
    for (int q = 0; q < nx; ++q) qs[q] = q;
    return qs;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                  : comma - pos);
    if (tok.empty()) throw ConfigError("empty entry in q list '" + text + "'");
    try {
      std::size_t dash = tok.find('-', 1);  // allow leading minus to fail range check
      if (dash == std::string::npos) {
        qs.push_back(std::stoi(tok));
      } else {
        int lo = std::stoi(tok.substr(0, dash));
        int hi = std::stoi(tok.substr(dash + 1));
        if (hi < lo) throw ConfigError("descending range in q list: " + tok);
        for (int q = lo; q <= hi; ++q) qs.push_back(q);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad entry '" + tok + "' in q list");
    } catch (const std::out_of_range&) {
      throw ConfigError("entry '" + tok + "' out of integer range");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  for (int q : qs)
    if (q < 0 || q >= nx)
      throw ConfigError("q = " + std::to_string(q) + " outside [0, " +
                        std::to_string(nx) + ")");
  return qs;
}

//! Loads a spectra CSV and interpolates it onto the geometry's wavenumber
//! grid when the grids differ.
SpectralLibrary load_library_for(const std::string& path, const ImagingGeometry& g) {
  SpectralLibrary lib = load_spectra_csv(path);
  RVector grid(g.nk);
  for (int m = 0; m < g.nk; ++m) grid[m] = g.wavenumber(m);
  bool same = lib.nk() == g.nk;
  if (same)
    for (int m = 0; m < g.nk; ++m)
      if (std::abs(lib.wavenumbers[m] - grid[m]) > 1e-12 * std::max(1.0, std::abs(grid[m]))) {
        same = false;
        break;
      }
  return same ? lib : resample_library(lib, grid);
}

std::vector<std::string> selected_names(const SpectralLibrary& lib,
                                        const std::vector<int>& selection) {
  std::vector<std::string> names;
  names.reserve(selection.size());
  for (int s : selection) {
    if (s < 0 || s >= lib.size())
      throw ConfigError("selection index " + std::to_string(s) + " out of range");
    names.push_back(lib.profiles[s].name);
  }
  return names;
}

json geometry_json(const ImagingGeometry& g) {
  return json::parse(geometry_to_json_text(g));
}

ScanData scan_from_cast(const CastArray& a) {
  if (!a.is_complex || a.dims.size() != 3)
    throw ConfigError("scan data container must be complex with dims (nf, nx, nk)");
  json meta = a.metadata.empty() ? json::object() : json::parse(a.metadata, nullptr, false);
  if (meta.is_discarded() || meta.value("kind", "") != std::string("scan-data"))
    throw ConfigError("container metadata does not declare kind 'scan-data'");
  ScanData s(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
             static_cast<int>(a.dims[2]));
  s.values = a.complexes;
  return s;
}

CastArray scan_to_cast(const ScanData& s, json meta) {
  CastArray a;
  a.is_complex = true;
  a.dims = {static_cast<std::uint64_t>(s.nf), static_cast<std::uint64_t>(s.nx),
            static_cast<std::uint64_t>(s.nk)};
  a.complexes = s.values;
  meta["kind"] = "scan-data";
  a.metadata = meta.dump();
  return a;
}

CastArray density_to_cast(const DensityStack& p, json meta) {
  CastArray a;
  a.is_complex = true;
  a.dims = {static_cast<std::uint64_t>(p.ns), static_cast<std::uint64_t>(p.nx),
            static_cast<std::uint64_t>(p.nz)};
  a.complexes = p.values;
  meta["kind"] = "density-stack";
  meta["domain"] = "transverse-dft";
  a.metadata = meta.dump();
  return a;
}

DensityStack density_from_cast(const CastArray& a) {
  if (!a.is_complex || a.dims.size() != 3)
    throw ConfigError("density container must be complex with dims (ns, nx, nz)");
  json meta = a.metadata.empty() ? json::object() : json::parse(a.metadata, nullptr, false);
  if (meta.is_discarded() || meta.value("kind", "") != std::string("density-stack"))
    throw ConfigError("container metadata does not declare kind 'density-stack'");
  if (meta.value("domain", "") != std::string("transverse-dft"))
    throw ConfigError("density container domain must be 'transverse-dft'");
  DensityStack p(static_cast<int>(a.dims[0]), static_cast<int>(a.dims[1]),
                 static_cast<int>(a.dims[2]));
  p.values = a.complexes;
  return p;
}

ImagingGeometry geometry_from_metadata(const std::string& metadata) {
  json meta = json::parse(metadata, nullptr, false);
  if (meta.is_discarded() || !meta.contains("geometry"))
    throw ConfigError("container metadata carries no geometry record");
  return geometry_from_json_text(meta.at("geometry").dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectroscopic tomography pipeline"};
  app.set_version_flag("--version", SPECTOM_VERSION);
  app.set_config("--config", "", "Structured config file (INI; [subcommand] sections)");
  app.require_subcommand(1);

  int threads = 1;
  std::string run_dir = "run";
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")
      ->capture_default_str();
  app.add_option("--run-dir", run_dir, "Directory receiving outputs and the manifest")
      ->capture_default_str();

  // --- kernel-build ---------------------------------------------------------
  auto* cmd_kernel = app.add_subcommand("kernel-build", "Build and save a kernel table");
  GeometryCli kb_geo;
  int kb_nodes = kDefaultQuadratureNodes;
  std::string kb_output = "kernel.cast";
  add_geometry_options(cmd_kernel, kb_geo);
  cmd_kernel->add_option("--nodes", kb_nodes, "Gauss-Legendre node count")
      ->capture_default_str();
  cmd_kernel->add_option("--output", kb_output, "Output container name")
      ->capture_default_str();

  // --- synth-spectra --------------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth-spectra", "Generate a synthetic spectral library");
  GeometryCli sy_geo;
  int sy_count = 3;
  std::string sy_kind = "lorentzian";
  std::uint64_t sy_seed = 1;
  int sy_oscillators = 99;
  std::vector<double> sy_sigma0{0.0, 0.1};
  std::vector<double> sy_sigma{0.0, 0.1};
  std::vector<double> sy_nu{1.2 * M_PI, 4.4 * M_PI};
  std::vector<double> sy_gamma{2.0 * M_PI * 1e-3, 4.0 * M_PI * 1e-2};
  std::string sy_output = "spectra.csv";
  add_geometry_options(cmd_synth, sy_geo);
  cmd_synth->add_option("--count", sy_count, "Number of profiles")->capture_default_str();
  cmd_synth
      ->add_option("--kind", sy_kind, "Profile family: lorentzian | random")
      ->check(CLI::IsMember({"lorentzian", "random"}))
      ->capture_default_str();
  cmd_synth->add_option("--seed", sy_seed, "Seed of the first profile (profile i uses seed+i)")
      ->capture_default_str();
  cmd_synth->add_option("--oscillators", sy_oscillators, "Lorentzian oscillators per profile")
      ->capture_default_str();
  cmd_synth->add_option("--sigma0", sy_sigma0, "Background susceptibility range lo,hi")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  cmd_synth->add_option("--sigma", sy_sigma, "Oscillator strength range lo,hi")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  cmd_synth->add_option("--nu", sy_nu, "Resonance wavenumber range lo,hi (rad/um)")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  cmd_synth->add_option("--gamma", sy_gamma, "Damping range lo,hi")
      ->delimiter(',')
      ->expected(2)
      ->capture_default_str();
  cmd_synth->add_option("--output", sy_output, "Output CSV name")->capture_default_str();

  // --- simulate -------------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "Synthesize scan data from a point phantom");
  GeometryCli sm_geo;
  std::string sm_spectra, sm_phantom;
  std::vector<int> sm_select;
  std::string sm_mode = "foldy";
  std::vector<double> sm_xi;
  std::uint64_t sm_seed = 0;
  double sm_delta = 1.0;
  std::string sm_output = "scan.cast";
  std::string sm_truth;
  add_geometry_options(cmd_sim, sm_geo);
  cmd_sim->add_option("--spectra", sm_spectra, "Spectral library CSV")->required();
  cmd_sim->add_option("--phantom", sm_phantom, "Phantom file (x z species strength lines)")
      ->required();
  cmd_sim->add_option("--select", sm_select, "Library profile indices used as species")
      ->delimiter(',')
      ->required();
  cmd_sim->add_option("--mode", sm_mode, "Scattering model: born | foldy")
      ->check(CLI::IsMember({"born", "foldy"}))
      ->capture_default_str();
  cmd_sim->add_option("--xi", sm_xi,
                      "Spectral-noise variance: one value (all species) or one per species; "
                      "omit for none")
      ->delimiter(',');
  cmd_sim->add_option("--seed", sm_seed, "Root seed for spectral perturbations")
      ->capture_default_str();
  cmd_sim->add_option("--delta", sm_delta, "Global object scaling, in (0,1]")
      ->capture_default_str();
  cmd_sim->add_option("--output", sm_output, "Output container name")->capture_default_str();
  cmd_sim->add_option("--truth", sm_truth,
                      "Also write the on-grid reference density stack to this name");

  // --- reconstruct ----------------------------------------------------------
  auto* cmd_rec = app.add_subcommand("reconstruct", "Recover per-species densities from scan data");
  std::string rc_data, rc_spectra;
  std::vector<int> rc_select;
  std::string rc_reg = "tikhonov";
  double rc_lambda = 1e-5;
  int rc_max_iters = 300;
  double rc_cg_tol = 1e-8;
  int rc_power_iters = 40;
  std::uint64_t rc_seed = 0;
  int rc_nodes = kDefaultQuadratureNodes;
  std::string rc_kernel_cache;
  bool rc_project = false;
  double rc_basis_tol = 1e-8;
  std::string rc_output = "densities.cast";
  std::string rc_trace = "trace.csv";
  cmd_rec->add_option("--data", rc_data, "Scan-data container from 'simulate'")->required();
  cmd_rec->add_option("--spectra", rc_spectra, "Spectral library CSV")->required();
  cmd_rec->add_option("--select", rc_select, "Library profile indices used as species")
      ->delimiter(',')
      ->required();
  cmd_rec
      ->add_option("--regularizer", rc_reg,
                   "tikhonov (conjugate gradient) | l1 | group-l21 (accelerated proximal)")
      ->check(CLI::IsMember({"tikhonov", "l1", "group-l21"}))
      ->capture_default_str();
  cmd_rec->add_option("--lambda", rc_lambda, "Regularization weight")->capture_default_str();
  cmd_rec->add_option("--max-iters", rc_max_iters, "Iteration cap")->capture_default_str();
  cmd_rec->add_option("--cg-tol", rc_cg_tol, "Relative gradient stopping tolerance")
      ->capture_default_str();
  cmd_rec->add_option("--power-iters", rc_power_iters, "Power iterations for the step size")
      ->capture_default_str();
  cmd_rec->add_option("--seed", rc_seed, "Power-iteration start-vector seed")
      ->capture_default_str();
  cmd_rec->add_option("--nodes", rc_nodes, "Gauss-Legendre node count")->capture_default_str();
  cmd_rec->add_option("--kernel-cache", rc_kernel_cache,
                      "Kernel-table cache path (reused when geometry and nodes match)");
  cmd_rec->add_flag("--project-passband", rc_project,
                    "Project the result onto the per-q observable subspace");
  cmd_rec->add_option("--basis-tol", rc_basis_tol, "Relative SV cutoff for the passband basis")
      ->capture_default_str();
  cmd_rec->add_option("--output", rc_output, "Output container name")->capture_default_str();
  cmd_rec->add_option("--trace", rc_trace, "Objective-trace CSV name")->capture_default_str();

  // --- audit-uniqueness -----------------------------------------------------
  auto* cmd_audit = app.add_subcommand("audit-uniqueness",
                                       "Run the identifiability checks on selected q blocks");
  GeometryCli au_geo;
  std::string au_spectra;
  std::vector<int> au_select;
  std::string au_q = "0";
  int au_nodes = kDefaultQuadratureNodes;
  std::string au_kernel_cache;
  double au_basis_tol = 1e-8, au_rank_tol = 1e-8;
  long au_subset_budget = 100000, au_search_budget = 2000000, au_brute_budget = 100000;
  std::string au_strategy = "greedy";
  std::uint64_t au_seed = 0;
  int au_block_ns = 0;
  add_geometry_options(cmd_audit, au_geo);
  cmd_audit->add_option("--spectra", au_spectra, "Spectral library CSV")->required();
  cmd_audit->add_option("--select", au_select, "Library profile indices used as species")
      ->delimiter(',')
      ->required();
  cmd_audit->add_option("--q", au_q, "Transverse-frequency indices: 'all', list, or a-b ranges")
      ->capture_default_str();
  cmd_audit->add_option("--nodes", au_nodes, "Gauss-Legendre node count")->capture_default_str();
  cmd_audit->add_option("--kernel-cache", au_kernel_cache, "Kernel-table cache path");
  cmd_audit->add_option("--basis-tol", au_basis_tol, "Relative SV cutoff for the passband basis")
      ->capture_default_str();
  cmd_audit->add_option("--rank-tol", au_rank_tol, "Relative SV cutoff for rank decisions")
      ->capture_default_str();
  cmd_audit->add_option("--subset-budget", au_subset_budget, "Subset enumeration budget")
      ->capture_default_str();
  cmd_audit->add_option("--search-budget", au_search_budget, "Partition search budget")
      ->capture_default_str();
  cmd_audit->add_option("--brute-budget", au_brute_budget, "Support enumeration budget")
      ->capture_default_str();
  cmd_audit->add_option("--strategy", au_strategy, "Partition search: greedy | exhaustive")
      ->check(CLI::IsMember({"greedy", "exhaustive"}))
      ->capture_default_str();
  cmd_audit->add_option("--seed", au_seed, "Sampling seed for budgeted checks")
      ->capture_default_str();
  cmd_audit->add_option("--block-sparse-ns", au_block_ns,
                        "Also audit dictionary recovery for this sparsity (0 = off)")
      ->capture_default_str();

  // --- sv-scan ---------------------------------------------------------------
  auto* cmd_scan = app.add_subcommand("sv-scan", "Singular-value spectra of per-q blocks");
  GeometryCli sc_geo;
  std::string sc_spectra;
  std::vector<int> sc_select;
  std::string sc_q = "all";
  bool sc_normalize = false, sc_kernel_only = false;
  long sc_budget = 8'000'000;
  int sc_nodes = kDefaultQuadratureNodes;
  std::string sc_kernel_cache;
  std::string sc_output = "sv_scan.csv";
  add_geometry_options(cmd_scan, sc_geo);
  cmd_scan->add_option("--spectra", sc_spectra,
                       "Spectral library CSV (unused with --kernel-only)");
  cmd_scan->add_option("--select", sc_select, "Library profile indices used as species")
      ->delimiter(',');
  cmd_scan->add_option("--q", sc_q, "Transverse-frequency indices: 'all', list, or a-b ranges")
      ->capture_default_str();
  cmd_scan->add_flag("--normalize", sc_normalize, "Divide each spectrum by its largest value");
  cmd_scan->add_flag("--kernel-only", sc_kernel_only,
                     "Scan the stacked kernel blocks instead of the full system");
  cmd_scan->add_option("--budget", sc_budget, "Dense entries allowed per assembled block")
      ->capture_default_str();
  cmd_scan->add_option("--nodes", sc_nodes, "Gauss-Legendre node count")->capture_default_str();
  cmd_scan->add_option("--kernel-cache", sc_kernel_cache, "Kernel-table cache path");
  cmd_scan->add_option("--output", sc_output, "Output CSV name")->capture_default_str();

  // --- sv-ensemble ------------------------------------------------------------
  auto* cmd_ens = app.add_subcommand("sv-ensemble",
                                     "Singular-value envelopes over random library subsets");
  GeometryCli en_geo;
  std::string en_spectra;
  int en_ns = 3;
  std::vector<int> en_nf_list{1, 2, 3};
  int en_trials = 200;
  std::uint64_t en_seed = 0;
  int en_nodes = kDefaultQuadratureNodes;
  std::string en_kernel_cache;
  std::string en_output = "sv_ensemble.csv";
  add_geometry_options(cmd_ens, en_geo);
  cmd_ens->add_option("--spectra", en_spectra, "Spectral library CSV (the sampling pool)")
      ->required();
  cmd_ens->add_option("--ns", en_ns, "Species per draw")->capture_default_str();
  cmd_ens->add_option("--nf-list", en_nf_list, "Focal-plane counts to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  cmd_ens->add_option("--trials", en_trials, "Realizations per focal-plane count")
      ->capture_default_str();
  cmd_ens->add_option("--seed", en_seed, "Subset-sampling seed")->capture_default_str();
  cmd_ens->add_option("--nodes", en_nodes, "Gauss-Legendre node count")->capture_default_str();
  cmd_ens->add_option("--kernel-cache", en_kernel_cache, "Kernel-table cache path");
  cmd_ens->add_option("--output", en_output, "Output CSV name")->capture_default_str();

  // --- render ------------------------------------------------------------------
  auto* cmd_render = app.add_subcommand("render", "Write PGM/PPM images from a density stack");
  std::string rd_densities;
  std::vector<int> rd_rgb;
  std::string rd_transform = "magnitude";
  std::string rd_prefix = "img";
  cmd_render->add_option("--densities", rd_densities, "Density-stack container")->required();
  cmd_render->add_option("--rgb", rd_rgb,
                         "Species indices for the R,G,B channels (-1 = empty); "
                         "omit to write grayscale images only")
      ->delimiter(',');
  cmd_render->add_option("--transform", rd_transform, "Pixel map: magnitude | magnitude2")
      ->check(CLI::IsMember({"magnitude", "magnitude2"}))
      ->capture_default_str();
  cmd_render->add_option("--prefix", rd_prefix, "Image name prefix inside the run directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    set_thread_count(threads);
    fs::path dir = make_run_dir(run_dir);
    RunManifest manifest;
    manifest.dir = dir;
    manifest.config_ini = app.config_to_str(true, false);

    if (*cmd_kernel) {
      manifest.command = "kernel-build";
      ImagingGeometry geom = build_geometry(kb_geo);
      KernelTable table = build_kernel_table(geom, kb_nodes);
      const std::string out = in_run_dir(dir, kb_output);
      save_kernel_table(out, table);
      manifest.add_output(out);
      std::cout << "kernel table " << geom.nf() << " x " << geom.nx << " x " << geom.nk
                << " x " << geom.nz << " (geometry " << hash_hex(geom.hash()) << ") -> "
                << out << "\n";
    } else if (*cmd_synth) {
      manifest.command = "synth-spectra";
      manifest.seed = sy_seed;
      manifest.has_seed = true;
      ImagingGeometry geom = build_geometry(sy_geo);
      if (sy_count < 1) throw ConfigError("synth-spectra: --count must be >= 1");
      RVector grid(geom.nk);
      for (int m = 0; m < geom.nk; ++m) grid[m] = geom.wavenumber(m);
      SpectralLibrary lib;
      lib.wavenumbers = grid;
      for (int i = 0; i < sy_count; ++i) {
        const std::uint64_t seed = sy_seed + static_cast<std::uint64_t>(i);
        SpectralProfile prof =
            sy_kind == "random"
                ? random_profile(seed, geom.nk)
                : synth_lorentzian(seed, sy_oscillators, {sy_sigma0[0], sy_sigma0[1]},
                                   {sy_sigma[0], sy_sigma[1]}, {sy_nu[0], sy_nu[1]},
                                   {sy_gamma[0], sy_gamma[1]}, grid);
        prof.name = "s" + std::to_string(i);
        lib.profiles.push_back(std::move(prof));
      }
      lib.validate();
      const std::string out = in_run_dir(dir, sy_output);
      save_spectra_csv(lib, out);
      manifest.add_output(out);
      std::cout << sy_count << " " << sy_kind << " profiles on " << geom.nk
                << " wavenumbers -> " << out << "\n";
    } else if (*cmd_sim) {
      manifest.command = "simulate";
      manifest.seed = sm_seed;
      manifest.has_seed = true;
      ImagingGeometry geom = build_geometry(sm_geo);
      manifest.add_input(sm_spectra);
      manifest.add_input(sm_phantom);
      SpectralLibrary lib = load_library_for(sm_spectra, geom);
      SpectraMatrix h = build_H(lib, sm_select);
      std::vector<PointScatterer> phantom = load_phantom(sm_phantom);
      SimulationConfig cfg;
      cfg.mode = sm_mode == "born" ? ScatterMode::born : ScatterMode::foldy;
      cfg.geometry = geom;
      cfg.seed = sm_seed;
      cfg.delta = sm_delta;
      const int ns = static_cast<int>(sm_select.size());
      if (sm_xi.size() == 1)
        cfg.spectral_noise.assign(ns, sm_xi[0]);
      else
        cfg.spectral_noise = sm_xi;
      ScanData scan = simulate_point_data(phantom, h, cfg);
      json meta{{"geometry", geometry_json(geom)},
                {"mode", sm_mode},
                {"delta", sm_delta},
                {"seed", sm_seed},
                {"spectral_noise", cfg.spectral_noise},
                {"selection", sm_select},
                {"species", selected_names(lib, sm_select)},
                {"scatterers", phantom.size()}};
      const std::string out = in_run_dir(dir, sm_output);
      cast_write(out, scan_to_cast(scan, meta));
      manifest.add_output(out);
      if (!sm_truth.empty()) {
        DensityStack truth = scatterers_to_density(phantom, ns, geom, sm_delta);
        json tmeta{{"geometry", geometry_json(geom)},
                   {"selection", sm_select},
                   {"species", selected_names(lib, sm_select)},
                   {"source", "phantom"},
                   {"delta", sm_delta}};
        const std::string tout = in_run_dir(dir, sm_truth);
        cast_write(tout, density_to_cast(density_to_fourier(truth), tmeta));
        manifest.add_output(tout);
      }
      std::cout << phantom.size() << " scatterers, " << ns << " species, mode " << sm_mode
                << " -> " << out << "\n";
    } else if (*cmd_rec) {
      manifest.command = "reconstruct";
      manifest.seed = rc_seed;
      manifest.has_seed = true;
      manifest.add_input(rc_data);
      manifest.add_input(rc_spectra);
      CastArray array = cast_read(rc_data);
      ImagingGeometry geom = geometry_from_metadata(array.metadata);
      for (const auto& w : geom.validate()) std::cerr << "warning: " << w << "\n";
      ScanData scan = scan_from_cast(array);
      if (scan.nf != geom.nf() || scan.nx != geom.nx || scan.nk != geom.nk)
        throw ConfigError("scan dims disagree with the embedded geometry");
      SpectralLibrary lib = load_library_for(rc_spectra, geom);
      SpectraMatrix h = build_H(lib, rc_select);
      KernelTable table = load_or_build_kernel_table(geom, rc_nodes, rc_kernel_cache);
      if (!rc_kernel_cache.empty()) manifest.add_output(rc_kernel_cache);

      ReconConfig cfg;
      cfg.regularizer = rc_reg == "tikhonov"
                            ? Regularizer::tikhonov
                            : (rc_reg == "l1" ? Regularizer::l1 : Regularizer::group_l21);
      cfg.lambda_r = rc_lambda;
      cfg.max_iters = rc_max_iters;
      cfg.cg_tol = rc_cg_tol;
      cfg.power_iters = rc_power_iters;
      cfg.seed = rc_seed;
      MeasurementStack s = measurements_to_fourier(scan);
      ReconResult result = cfg.regularizer == Regularizer::tikhonov
                               ? solve_tikhonov(s, h, table, cfg)
                               : solve_fista(s, h, table, cfg);
      if (rc_project) {
        std::vector<PassbandBasis> bases(geom.nx);
        parallel_for(static_cast<std::size_t>(geom.nx), [&](std::size_t q) {
          bases[q] = nullspace_basis(stacked_kernel(table, static_cast<int>(q)), rc_basis_tol);
        });
        result.densities = project_passband(result.densities, bases);
      }

      json meta{{"geometry", geometry_json(geom)},
                {"regularizer", rc_reg},
                {"lambda", rc_lambda},
                {"iterations", result.iterations_run},
                {"residual_norm", result.residual_norm},
                {"selection", rc_select},
                {"species", selected_names(lib, rc_select)},
                {"projected", rc_project}};
      const std::string out = in_run_dir(dir, rc_output);
      cast_write(out, density_to_cast(result.densities, meta));
      manifest.add_output(out);

      std::vector<std::vector<double>> cols(2);
      for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
        cols[0].push_back(static_cast<double>(i));
        cols[1].push_back(result.objective_trace[i]);
      }
      const std::string trace = in_run_dir(dir, rc_trace);
      write_csv(trace, {"iteration", "objective"}, cols);
      manifest.add_output(trace);
      std::cout << rc_reg << " lambda " << rc_lambda << ": " << result.iterations_run
                << " iterations, residual " << result.residual_norm << " -> " << out << "\n";
    } else if (*cmd_audit) {
      manifest.command = "audit-uniqueness";
      manifest.seed = au_seed;
      manifest.has_seed = true;
      ImagingGeometry geom = build_geometry(au_geo);
      manifest.add_input(au_spectra);
      SpectralLibrary lib = load_library_for(au_spectra, geom);
      SpectraMatrix h = build_H(lib, au_select);
      KernelTable table = load_or_build_kernel_table(geom, au_nodes, au_kernel_cache);
      if (!au_kernel_cache.empty()) manifest.add_output(au_kernel_cache);
      AuditOptions opts;
      opts.basis_tol = au_basis_tol;
      opts.rank_tol = au_rank_tol;
      opts.subset_budget = au_subset_budget;
      opts.search_budget = au_search_budget;
      opts.brute_budget = au_brute_budget;
      opts.strategy = au_strategy == "exhaustive" ? SearchStrategy::exhaustive
                                                  : SearchStrategy::greedy;
      opts.seed = au_seed;
      if (au_block_ns > 0) opts.block_sparse_ns = au_block_ns;
      for (int q : parse_q_list(au_q, geom.nx)) {
        UniquenessReport rep = audit_uniqueness(h, table, q, opts);
        const std::string text = report_to_text(rep);
        std::cout << text;
        const std::string base = "audit_q" + std::to_string(q);
        const std::string tpath = in_run_dir(dir, base + ".txt");
        const std::string kpath = in_run_dir(dir, base + ".kv");
        std::ofstream tout(tpath);
        tout << text;
        if (!tout) throw ConfigError("cannot write " + tpath);
        tout.close();
        std::ofstream kout(kpath);
        kout << report_to_keyvalue(rep);
        if (!kout) throw ConfigError("cannot write " + kpath);
        kout.close();
        manifest.add_output(tpath);
        manifest.add_output(kpath);
      }
    } else if (*cmd_scan) {
      manifest.command = "sv-scan";
      ImagingGeometry geom = build_geometry(sc_geo);
      SpectraMatrix h;
      std::vector<std::string> names;
      if (!sc_kernel_only) {
        if (sc_spectra.empty())
          throw ConfigError("sv-scan: --spectra is required unless --kernel-only is given");
        if (sc_select.empty())
          throw ConfigError("sv-scan: --select is required unless --kernel-only is given");
        manifest.add_input(sc_spectra);
        SpectralLibrary lib = load_library_for(sc_spectra, geom);
        h = build_H(lib, sc_select);
        names = selected_names(lib, sc_select);
      }
      KernelTable table = load_or_build_kernel_table(geom, sc_nodes, sc_kernel_cache);
      if (!sc_kernel_cache.empty()) manifest.add_output(sc_kernel_cache);
      SvScanOptions opts;
      opts.normalize = sc_normalize;
      opts.kernel_only = sc_kernel_only;
      opts.budget = sc_budget;
      SvScan scan = sv_scan(h, table, parse_q_list(sc_q, geom.nx), opts, names);
      std::vector<std::vector<double>> cols(3);
      for (std::size_t i = 0; i < scan.q_list.size(); ++i)
        for (Eigen::Index j = 0; j < scan.spectra[i].size(); ++j) {
          cols[0].push_back(static_cast<double>(scan.q_list[i]));
          cols[1].push_back(static_cast<double>(j));
          cols[2].push_back(scan.spectra[i][j]);
        }
      const std::string out = in_run_dir(dir, sc_output);
      write_csv(out, {"q", "index", "value"}, cols);
      manifest.add_output(out);
      std::cout << scan.q_list.size() << " blocks scanned (geometry "
                << hash_hex(scan.geometry_hash) << ") -> " << out << "\n";
    } else if (*cmd_ens) {
      manifest.command = "sv-ensemble";
      manifest.seed = en_seed;
      manifest.has_seed = true;
      ImagingGeometry geom = build_geometry(en_geo);
      manifest.add_input(en_spectra);
      SpectralLibrary lib = load_library_for(en_spectra, geom);
      KernelTable table = load_or_build_kernel_table(geom, en_nodes, en_kernel_cache);
      if (!en_kernel_cache.empty()) manifest.add_output(en_kernel_cache);
      SvEnsemble ens = sv_ensemble(lib, en_ns, table, en_nf_list, en_trials, en_seed);
      std::vector<std::vector<double>> cols(4);
      for (std::size_t i = 0; i < ens.nf_list.size(); ++i)
        for (Eigen::Index j = 0; j < ens.min_envelope[i].size(); ++j) {
          cols[0].push_back(static_cast<double>(ens.nf_list[i]));
          cols[1].push_back(static_cast<double>(j));
          cols[2].push_back(ens.min_envelope[i][j]);
          cols[3].push_back(ens.max_envelope[i][j]);
        }
      const std::string out = in_run_dir(dir, en_output);
      write_csv(out, {"nf", "index", "min", "max"}, cols);
      manifest.add_output(out);
      std::cout << en_trials << " trials x " << ens.nf_list.size() << " focal-plane counts -> "
                << out << "\n";
    } else if (*cmd_render) {
      manifest.command = "render";
      manifest.add_input(rd_densities);
      DensityStack p = density_from_cast(cast_read(rd_densities));
      ImageTransform transform = rd_transform == "magnitude2" ? ImageTransform::magnitude_sq
                                                              : ImageTransform::magnitude;
      std::vector<std::string> paths =
          render_images(p, rd_rgb, transform, in_run_dir(dir, rd_prefix));
      for (const auto& path : paths) {
        manifest.add_output(path);
        std::cout << path << "\n";
      }
    }

    manifest.write();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error (budget): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
