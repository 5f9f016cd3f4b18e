#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spectom/forward.hpp"
#include "spectom/kernel.hpp"
#include "spectom/spectra.hpp"
#include "spectom/types.hpp"

namespace spectom {

//! Orthonormal basis of the per-q observable (passband) subspace.
struct PassbandBasis {
  CMatrix v;          // nz x r, V^H V = I
  int r = 0;
  double tol = 0.0;
  bool degenerate = false;  // all-zero input block
};

//! Numerical rank at a relative singular-value threshold, with the spectral
//! gap at the cut so marginal verdicts are visible.
struct RankInfo {
  int rank = 0;
  double gap = 0.0;  // sigma[rank-1]/sigma[rank], inf when rank == min dim
  RVector singular_values;
};

RankInfo numerical_rank(const CMatrix& m, double tol = 1e-8);

//! SVD-based: r = #{sigma_i > tol*sigma_max}, V = leading right singular
//! vectors. All-zero input returns r = 0 flagged degenerate.
PassbandBasis nullspace_basis(const CMatrix& stacked_kernel, double tol);

//! Largest principal angle (radians) between the column spans of two
//! orthonormal bases.
double max_principal_angle(const CMatrix& v1, const CMatrix& v2);

//! Khatri-Rao of (1_nf (x) H) with the restricted kernel stack:
//! (nf*nk) x (ns*r), column (s*r + j) pairing species s with basis column j.
CMatrix restricted_phi(const SpectraMatrix& h, const CMatrix& b_stack);

struct ConditionResult {
  bool pass = false;
  bool sampled = false;  // N4 only: verdict from randomized subset sampling
  std::string diagnostic;
};

//! Necessary conditions N1..N5 for passband uniqueness.
struct NecessaryResults {
  ConditionResult n1, n2, n3, n4, n5;
  bool all_pass() const {
    return n1.pass && n2.pass && n3.pass && n4.pass && n5.pass;
  }
};

NecessaryResults check_necessary(const SpectraMatrix& h, const CMatrix& b_stack,
                                 int nf, int r,
                                 long subset_budget = 100000,
                                 double rank_tol = 1e-8,
                                 std::uint64_t seed = 0);

enum class SearchStrategy { exhaustive, greedy };

//! Disjoint wavenumber sets {J_i}, i = 1..nf, each of size r/nf, whose
//! stacked restricted-kernel rows are square and full rank; existence
//! certifies uniqueness for generic spectra.
struct SufficiencyResult {
  bool applicable = false;  // nf divides r, nk >= r
  bool pass = false;
  bool conclusive = true;   // false when a search budget stopped exploration
  std::vector<std::vector<int>> partition;
  std::string note;
};

SufficiencyResult check_sufficient(const CMatrix& b_stack, int nf, int r,
                                   SearchStrategy strategy,
                                   double rank_tol = 1e-8,
                                   long search_budget = 2000000,
                                   std::uint64_t seed = 0);

struct KruskalResult {
  int k = 0;
  bool lower_bound = false;  // true when enumeration hit the budget
};

//! Largest k such that every k-row subset is linearly independent; full
//! Kruskal rank (k = min(n,m)) certifies generic uniqueness.
KruskalResult kruskal_rank(const CMatrix& x, double rank_tol = 1e-8,
                           long budget = 200000, std::uint64_t seed = 0);

//! h2 = (diag(h1) B w) ./ (B v) elementwise; [D1 B, D2 B] then has rank
//! <= 2r-1 by construction.
CVector adversarial_spectra(const CMatrix& b, const CVector& h1,
                            const CVector& w, const CVector& v);

struct BlockSparseResult {
  bool theorem_pass = false;
  bool brute_checked = false;
  bool brute_pass = false;
  std::vector<std::vector<int>> row_sets;
  std::string note;
};

//! Sufficient condition for unique block-Ns-sparse dictionary recovery:
//! nk > r, nf >= 2*ns, and 2*ns disjoint independent row sets of size r in
//! the restricted stack. Small instances are additionally brute-verified by
//! enumerating every 2*ns-species support and testing full column rank.
BlockSparseResult check_block_sparse(const SpectraMatrix& h_library,
                                     const CMatrix& b_stack, int ns,
                                     double rank_tol = 1e-8,
                                     long brute_budget = 100000,
                                     std::uint64_t seed = 0);

struct AuditOptions {
  double basis_tol = 1e-8;
  double rank_tol = 1e-8;
  long subset_budget = 100000;
  long search_budget = 2000000;
  long brute_budget = 100000;
  SearchStrategy strategy = SearchStrategy::greedy;
  std::uint64_t seed = 0;
  std::optional<int> block_sparse_ns;  // audit the dictionary case when set
};

//! Everything the theory offers for one transverse-frequency block.
struct UniquenessReport {
  int q = 0;
  int r = 0;
  int ns = 0;
  int nf = 0;
  int nk = 0;
  bool degenerate = false;       // zero kernel block (outside passband)
  double max_plane_angle = 0.0;  // radians, between per-plane passbands
  NecessaryResults necessary;
  SufficiencyResult sufficient;
  KruskalResult kruskal;
  bool kruskal_full = false;
  int rank_restricted = 0;       // measured rank of Phi-tilde
  double rank_gap = 0.0;
  bool rank_matches_sufficient = true;
  std::optional<BlockSparseResult> block_sparse;
};

UniquenessReport audit_uniqueness(const SpectraMatrix& h,
                                  const KernelTable& table, int q,
                                  const AuditOptions& opts = {});

//! Human-readable multi-line report.
std::string report_to_text(const UniquenessReport& rep);
//! Flat "key = value" lines; schema documented in the README.
std::string report_to_keyvalue(const UniquenessReport& rep);

}  // namespace spectom
