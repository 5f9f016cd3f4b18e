#include "spectom/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "spectom/rng.hpp"

namespace spectom {

namespace {

RVector singular_values_of(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return RVector();
  Eigen::BDCSVD<CMatrix> svd(m);
  return svd.singularValues();
}

int rank_from_sv(const RVector& sv, double tol) {
  if (sv.size() == 0) return 0;
  double smax = sv[0];
  if (!(smax > 0.0)) return 0;
  int r = 0;
  while (r < sv.size() && sv[r] > tol * smax) ++r;
  return r;
}

//! C(n,k) capped at `cap` to avoid overflow during budget decisions.
long count_combinations(int n, int k, long cap) {
  if (k < 0 || k > n) return 0;
  long double acc = 1.0L;
  for (int i = 0; i < k; ++i) {
    acc = acc * (n - i) / (i + 1);
    if (acc > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<long>(acc + 0.5L);
}

bool next_combination(std::vector<int>& idx, int n) {
  int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::string join_ints(const std::vector<int>& v, const char* sep = ",") {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << sep;
    os << v[i];
  }
  return os.str();
}

}  // namespace

RankInfo numerical_rank(const CMatrix& m, double tol) {
  RankInfo info;
  info.singular_values = singular_values_of(m);
  info.rank = rank_from_sv(info.singular_values, tol);
  const auto& sv = info.singular_values;
  if (info.rank == 0)
    info.gap = 0.0;
  else if (info.rank >= sv.size() || !(sv[info.rank] > 0.0))
    info.gap = std::numeric_limits<double>::infinity();
  else
    info.gap = sv[info.rank - 1] / sv[info.rank];
  return info;
}

PassbandBasis nullspace_basis(const CMatrix& stacked_kernel, double tol) {
  if (!(tol > 0.0 && tol < 1.0))
    throw ConfigError("nullspace_basis: tol must lie in (0,1)");
  PassbandBasis basis;
  basis.tol = tol;
  if (stacked_kernel.norm() == 0.0) {
    basis.degenerate = true;
    basis.v = CMatrix(stacked_kernel.cols(), 0);
    return basis;
  }
  Eigen::BDCSVD<CMatrix> svd(stacked_kernel, Eigen::ComputeThinV);
  basis.r = rank_from_sv(svd.singularValues(), tol);
  basis.v = svd.matrixV().leftCols(basis.r);
  return basis;
}

double max_principal_angle(const CMatrix& v1, const CMatrix& v2) {
  if (v1.cols() == 0 && v2.cols() == 0) return 0.0;
  if (v1.cols() == 0 || v2.cols() == 0) return M_PI / 2.0;
  CMatrix m = v1.adjoint() * v2;
  RVector sv = singular_values_of(m);
  double c = sv[std::min<Eigen::Index>(v1.cols(), v2.cols()) - 1];
  c = std::clamp(c, 0.0, 1.0);
  // sines of the principal angles are the singular values of the part of v2
  // outside span(v1); pairing the largest with the smallest cosine keeps the
  // angle accurate at both ends (acos alone bottoms out near sqrt(eps))
  CMatrix resid = v2 - v1 * m;
  RVector rs = singular_values_of(resid);
  double s = std::clamp(rs.size() ? rs[0] : 0.0, 0.0, 1.0);
  return std::atan2(s, c);
}

CMatrix restricted_phi(const SpectraMatrix& h, const CMatrix& b_stack) {
  if (h.rows() == 0 || b_stack.rows() % h.rows() != 0)
    throw ConfigError("restricted_phi: kernel row count must be nf * nk");
  int nf = static_cast<int>(b_stack.rows() / h.rows());
  CMatrix hbar = h.replicate(nf, 1);
  return khatri_rao(hbar, b_stack);
}

NecessaryResults check_necessary(const SpectraMatrix& h, const CMatrix& b_stack,
                                 int nf, int r, long subset_budget,
                                 double rank_tol, std::uint64_t seed) {
  const int nk = static_cast<int>(h.rows());
  const int ns = static_cast<int>(h.cols());
  if (b_stack.rows() != static_cast<Eigen::Index>(nf) * nk)
    throw ConfigError("check_necessary: b_stack rows must be nf * nk");
  NecessaryResults res;

  {  // N1: enough measurements
    res.n1.pass = static_cast<long>(nk) * nf >= static_cast<long>(ns) * r;
    std::ostringstream os;
    os << "nk*nf = " << nk * nf << (res.n1.pass ? " >= " : " < ") << "ns*r = "
       << ns * r;
    res.n1.diagnostic = os.str();
  }

  {  // N2: spectra linearly independent
    RankInfo ri = numerical_rank(h, rank_tol);
    res.n2.pass = ri.rank == ns;
    std::ostringstream os;
    os << "rank(H) = " << ri.rank << " of " << ns;
    res.n2.diagnostic = os.str();
  }

  {  // N3: no restricted-kernel row orthogonal to all the others
    res.n3.pass = true;
    RVector norms(b_stack.rows());
    for (Eigen::Index i = 0; i < b_stack.rows(); ++i)
      norms[i] = b_stack.row(i).norm();
    for (Eigen::Index i = 0; i < b_stack.rows() && res.n3.pass; ++i) {
      bool coupled = false;
      for (Eigen::Index j = 0; j < b_stack.rows(); ++j) {
        if (j == i) continue;
        double ip = std::abs((b_stack.row(i).conjugate() * b_stack.row(j).transpose())(0, 0));
        if (ip > rank_tol * std::max(1e-300, norms[i] * norms[j])) {
          coupled = true;
          break;
        }
      }
      if (!coupled) {
        res.n3.pass = false;
        std::ostringstream os;
        os << "row " << i << " is orthogonal to all remaining rows"
           << (norms[i] == 0.0 ? " (zero row)" : "");
        res.n3.diagnostic = os.str();
      }
    }
    if (res.n3.pass) res.n3.diagnostic = "all rows coupled";
  }

  {  // N4: spectral-subset rank transfer
    res.n4.pass = true;
    res.n4.diagnostic = "no violating subset";
    std::vector<int> sizes;
    for (int js = ns; js <= nk; ++js)
      if (static_cast<long>(js) * nf < static_cast<long>(ns) * r)
        sizes.push_back(js);
    auto violates = [&](const std::vector<int>& subset) {
      CMatrix hj(subset.size(), ns);
      for (std::size_t t = 0; t < subset.size(); ++t) hj.row(t) = h.row(subset[t]);
      if (numerical_rank(hj, rank_tol).rank != ns) return false;
      std::vector<int> comp;
      comp.reserve(nk - subset.size());
      std::size_t p = 0;
      for (int i = 0; i < nk; ++i) {
        if (p < subset.size() && subset[p] == i) {
          ++p;
          continue;
        }
        comp.push_back(i);
      }
      CMatrix hc(comp.size(), ns);
      for (std::size_t t = 0; t < comp.size(); ++t) hc.row(t) = h.row(comp[t]);
      int rank_c = numerical_rank(hc, rank_tol).rank;
      // requirement: rank_c >= ns - (nf/r)|J|, exact in integers
      bool ok = static_cast<long>(rank_c) * r >=
                static_cast<long>(ns) * r - static_cast<long>(nf) * subset.size();
      return !ok;
    };
    long total = 0;
    for (int js : sizes) {
      total += count_combinations(nk, js, subset_budget + 1);
      if (total > subset_budget) break;
    }
    if (total <= subset_budget) {
      for (int js : sizes) {
        std::vector<int> subset(js);
        std::iota(subset.begin(), subset.end(), 0);
        do {
          if (violates(subset)) {
            res.n4.pass = false;
            res.n4.diagnostic = "violating subset J = {" + join_ints(subset) + "}";
            break;
          }
        } while (next_combination(subset, nk));
        if (!res.n4.pass) break;
      }
    } else if (!sizes.empty()) {
      res.n4.sampled = true;
      SubstreamRng rng(seed, "n4-sample");
      std::vector<int> pool(nk);
      for (long trial = 0; trial < subset_budget && res.n4.pass; ++trial) {
        int js = sizes[rng.below(sizes.size())];
        std::iota(pool.begin(), pool.end(), 0);
        for (int t = 0; t < js; ++t)
          std::swap(pool[t], pool[t + rng.below(nk - t)]);
        std::vector<int> subset(pool.begin(), pool.begin() + js);
        std::sort(subset.begin(), subset.end());
        if (violates(subset)) {
          res.n4.pass = false;
          res.n4.diagnostic =
              "violating subset J = {" + join_ints(subset) + "} (sampled)";
        }
      }
      if (res.n4.pass) res.n4.diagnostic = "no violation found (sampled)";
    }
  }

  {  // N5: every focal plane contributes enough independent rows
    long total = 0;
    for (int i = 0; i < nk; ++i) {
      CMatrix rows(nf, b_stack.cols());
      for (int f = 0; f < nf; ++f) rows.row(f) = b_stack.row(f * nk + i);
      total += numerical_rank(rows, rank_tol).rank;
    }
    res.n5.pass = total >= static_cast<long>(ns) * r;
    std::ostringstream os;
    os << "sum of per-wavenumber ranks = " << total
       << (res.n5.pass ? " >= " : " < ") << "ns*r = " << ns * r;
    res.n5.diagnostic = os.str();
  }
  return res;
}

namespace {

//! Rows of every focal plane restricted to wavenumber set J.
CMatrix gather_plane_rows(const CMatrix& b_stack, int nf, int nk,
                          const std::vector<int>& j_set) {
  CMatrix c(static_cast<Eigen::Index>(nf) * j_set.size(), b_stack.cols());
  Eigen::Index row = 0;
  for (int f = 0; f < nf; ++f)
    for (int idx : j_set) c.row(row++) = b_stack.row(f * nk + idx);
  return c;
}

bool full_row_rank(const CMatrix& m, double tol) {
  return numerical_rank(m, tol).rank == m.rows();
}

struct PartitionSearch {
  const CMatrix& b;
  int nf, nk, set_size;
  double tol;
  long budget;
  long visited = 0;
  std::vector<std::vector<int>> sets;
  std::vector<bool> used;
  bool exhausted_budget = false;

  bool extend(int set_idx) {
    if (set_idx == nf) return true;
    std::vector<int>& cur = sets[set_idx];
    // unordered sets: force ascending first elements across sets, and
    // ascending indices inside a set, so each partition is visited once
    int start;
    if (!cur.empty())
      start = cur.back() + 1;
    else if (set_idx == 0)
      start = 0;
    else
      start = sets[set_idx - 1].front() + 1;
    for (int idx = start; idx < nk; ++idx) {
      if (used[idx]) continue;
      if (++visited > budget) {
        exhausted_budget = true;
        return false;
      }
      cur.push_back(idx);
      used[idx] = true;
      if (full_row_rank(gather_plane_rows(b, nf, nk, cur), tol)) {
        bool done = static_cast<int>(cur.size()) == set_size
                        ? extend(set_idx + 1)
                        : extend(set_idx);
        if (done) return true;
      }
      used[idx] = false;
      cur.pop_back();
      if (exhausted_budget) return false;
    }
    return false;
  }
};

}  // namespace

SufficiencyResult check_sufficient(const CMatrix& b_stack, int nf, int r,
                                   SearchStrategy strategy, double rank_tol,
                                   long search_budget, std::uint64_t seed) {
  SufficiencyResult res;
  if (nf <= 0 || b_stack.rows() % nf != 0)
    throw ConfigError("check_sufficient: b_stack rows must be nf * nk");
  const int nk = static_cast<int>(b_stack.rows() / nf);
  if (r % nf != 0) {
    res.applicable = false;
    res.note = "nf does not divide r; partition criterion inapplicable";
    return res;
  }
  if (nk < r) {
    res.applicable = false;
    res.note = "nk < r; not enough wavenumbers for a partition";
    return res;
  }
  res.applicable = true;
  const int set_size = r / nf;

  if (strategy == SearchStrategy::exhaustive) {
    PartitionSearch search{b_stack, nf, nk, set_size, rank_tol, search_budget};
    search.sets.assign(nf, {});
    search.used.assign(nk, false);
    if (search.extend(0)) {
      res.pass = true;
      res.partition = search.sets;
      res.note = "exhaustive search";
    } else if (search.exhausted_budget) {
      res.conclusive = false;
      res.note = "search budget exceeded before a conclusion";
    } else {
      res.note = "no qualifying partition exists";
    }
    return res;
  }

  // Greedy with randomized retries.
  const int retries = 24;
  for (int attempt = 0; attempt < retries; ++attempt) {
    std::vector<int> order(nk);
    std::iota(order.begin(), order.end(), 0);
    if (attempt > 0) {
      SubstreamRng rng(seed, "sufficient-shuffle", attempt);
      for (int t = nk - 1; t > 0; --t)
        std::swap(order[t], order[rng.below(t + 1)]);
    }
    std::vector<bool> used(nk, false);
    std::vector<std::vector<int>> sets(nf);
    bool ok = true;
    for (int i = 0; i < nf && ok; ++i) {
      for (int idx : order) {
        if (used[idx]) continue;
        sets[i].push_back(idx);
        if (full_row_rank(gather_plane_rows(b_stack, nf, nk, sets[i]), rank_tol))
          used[idx] = true;
        else
          sets[i].pop_back();
        if (static_cast<int>(sets[i].size()) == set_size) break;
      }
      ok = static_cast<int>(sets[i].size()) == set_size;
    }
    if (ok) {
      for (auto& s : sets) std::sort(s.begin(), s.end());
      res.pass = true;
      res.partition = sets;
      res.note = attempt == 0 ? "greedy" : "greedy (shuffled retry)";
      return res;
    }
  }
  res.note = "greedy search failed; exhaustive may still succeed";
  return res;
}

KruskalResult kruskal_rank(const CMatrix& x, double rank_tol, long budget,
                           std::uint64_t seed) {
  const int n = static_cast<int>(x.rows());
  const int m = static_cast<int>(x.cols());
  const int kmax = std::min(n, m);
  KruskalResult res;
  SubstreamRng rng(seed, "kruskal-sample");
  long spent = 0;
  for (int k = 1; k <= kmax; ++k) {
    auto dependent = [&](const std::vector<int>& subset) {
      CMatrix sub(k, m);
      for (int t = 0; t < k; ++t) sub.row(t) = x.row(subset[t]);
      return numerical_rank(sub, rank_tol).rank < k;
    };
    long combos = count_combinations(n, k, budget + 1);
    if (spent + combos <= budget) {
      spent += combos;
      std::vector<int> subset(k);
      std::iota(subset.begin(), subset.end(), 0);
      do {
        if (dependent(subset)) {
          res.k = k - 1;
          return res;
        }
      } while (next_combination(subset, n));
      res.k = k;
    } else {
      long trials = std::max<long>(budget - spent, 0);
      std::vector<int> pool(n);
      for (long t = 0; t < trials; ++t) {
        std::iota(pool.begin(), pool.end(), 0);
        for (int i = 0; i < k; ++i)
          std::swap(pool[i], pool[i + rng.below(n - i)]);
        std::vector<int> subset(pool.begin(), pool.begin() + k);
        if (dependent(subset)) {
          res.k = k - 1;
          return res;  // witness found: exact value despite sampling
        }
      }
      res.lower_bound = true;  // level k not fully verified
      return res;
    }
  }
  return res;
}

CVector adversarial_spectra(const CMatrix& b, const CVector& h1,
                            const CVector& w, const CVector& v) {
  if (h1.size() != b.rows() || w.size() != b.cols() || v.size() != b.cols())
    throw ConfigError("adversarial_spectra: dimension mismatch");
  CVector bw = b * w;
  CVector bv = b * v;
  for (Eigen::Index i = 0; i < bv.size(); ++i)
    if (bv[i] == Complex(0.0, 0.0))
      throw NumericalError("adversarial_spectra: zero denominator entry");
  return (h1.array() * bw.array() / bv.array()).matrix();
}

BlockSparseResult check_block_sparse(const SpectraMatrix& h_library,
                                     const CMatrix& b_stack, int ns,
                                     double rank_tol, long brute_budget,
                                     std::uint64_t seed) {
  const int nk = static_cast<int>(h_library.rows());
  const int ms = static_cast<int>(h_library.cols());
  if (ms <= ns) throw ConfigError("check_block_sparse: requires Ms > Ns");
  if (nk == 0 || b_stack.rows() % nk != 0)
    throw ConfigError("check_block_sparse: b_stack rows must be nf * nk");
  const int nf = static_cast<int>(b_stack.rows() / nk);
  const int r = static_cast<int>(b_stack.cols());
  const Eigen::Index total_rows = b_stack.rows();

  BlockSparseResult res;
  std::ostringstream note;

  bool hypothesis = nk > r && nf >= 2 * ns;
  if (!hypothesis) {
    note << "hypothesis fails (needs nk > r and nf >= 2 ns); ";
  } else if (total_rows < static_cast<Eigen::Index>(2) * ns * r) {
    note << "too few rows for 2 ns disjoint sets of size r; ";
  } else {
    // find 2 ns disjoint independent row sets of size r, greedy + retries
    const int want = 2 * ns;
    const int retries = 24;
    for (int attempt = 0; attempt < retries && !res.theorem_pass; ++attempt) {
      std::vector<int> order(total_rows);
      std::iota(order.begin(), order.end(), 0);
      if (attempt > 0) {
        SubstreamRng rng(seed, "block-sparse-shuffle", attempt);
        for (Eigen::Index t = total_rows - 1; t > 0; --t)
          std::swap(order[t], order[rng.below(t + 1)]);
      }
      std::vector<bool> used(total_rows, false);
      std::vector<std::vector<int>> sets(want);
      bool ok = true;
      for (int i = 0; i < want && ok; ++i) {
        CMatrix acc(r, r);
        int have = 0;
        for (int row : order) {
          if (used[row]) continue;
          CMatrix trial(have + 1, r);
          if (have > 0) trial.topRows(have) = acc.topRows(have);
          trial.row(have) = b_stack.row(row);
          if (numerical_rank(trial, rank_tol).rank == have + 1) {
            acc.row(have) = b_stack.row(row);
            sets[i].push_back(row);
            used[row] = true;
            if (++have == r) break;
          }
        }
        ok = have == r;
      }
      if (ok) {
        res.theorem_pass = true;
        res.row_sets = sets;
      }
    }
    if (!res.theorem_pass) note << "no 2 ns disjoint independent row sets found; ";
  }

  // Brute-force check of the block-sparse uniqueness criterion: every
  // support of 2 ns species must give a full-column-rank restricted block.
  const int t_size = std::min(2 * ns, ms);
  long supports = count_combinations(ms, t_size, brute_budget + 1);
  if (supports <= brute_budget) {
    res.brute_checked = true;
    res.brute_pass = true;
    std::vector<int> support(t_size);
    std::iota(support.begin(), support.end(), 0);
    do {
      CMatrix hsub(nk, t_size);
      for (int t = 0; t < t_size; ++t) hsub.col(t) = h_library.col(support[t]);
      CMatrix phi = restricted_phi(hsub, b_stack);
      if (numerical_rank(phi, rank_tol).rank < phi.cols()) {
        res.brute_pass = false;
        note << "support {" << join_ints(support) << "} rank deficient; ";
        break;
      }
    } while (next_combination(support, ms));
  } else {
    note << "brute-force support check skipped (budget); ";
  }
  res.note = note.str();
  return res;
}

UniquenessReport audit_uniqueness(const SpectraMatrix& h,
                                  const KernelTable& table, int q,
                                  const AuditOptions& opts) {
  const auto& g = table.geometry;
  if (static_cast<int>(h.rows()) != g.nk)
    throw ConfigError("audit_uniqueness: H rows must equal nk");
  UniquenessReport rep;
  rep.q = q;
  rep.ns = static_cast<int>(h.cols());
  rep.nf = g.nf();
  rep.nk = g.nk;

  CMatrix stacked = stacked_kernel(table, q);
  PassbandBasis basis = nullspace_basis(stacked, opts.basis_tol);
  rep.r = basis.r;
  rep.degenerate = basis.degenerate;
  if (rep.degenerate) return rep;

  // per-plane passband agreement
  std::vector<PassbandBasis> plane_bases;
  for (int f = 0; f < g.nf(); ++f)
    plane_bases.push_back(nullspace_basis(table.block(f, q), opts.basis_tol));
  for (std::size_t a = 0; a < plane_bases.size(); ++a)
    for (std::size_t b = a + 1; b < plane_bases.size(); ++b)
      rep.max_plane_angle =
          std::max(rep.max_plane_angle,
                   max_principal_angle(plane_bases[a].v, plane_bases[b].v));

  CMatrix b_stack = stacked * basis.v;
  rep.necessary = check_necessary(h, b_stack, rep.nf, rep.r, opts.subset_budget,
                                  opts.rank_tol, opts.seed);
  rep.sufficient = check_sufficient(b_stack, rep.nf, rep.r, opts.strategy,
                                    opts.rank_tol, opts.search_budget, opts.seed);
  KruskalResult kr = kruskal_rank(b_stack, opts.rank_tol, opts.search_budget,
                                  opts.seed);
  rep.kruskal = kr;
  rep.kruskal_full =
      !kr.lower_bound &&
      kr.k == std::min<int>(static_cast<int>(b_stack.rows()), rep.r);

  RankInfo ri = numerical_rank(restricted_phi(h, b_stack), opts.rank_tol);
  rep.rank_restricted = ri.rank;
  rep.rank_gap = ri.gap;
  rep.rank_matches_sufficient =
      !rep.sufficient.pass || rep.rank_restricted == rep.ns * rep.r;

  if (opts.block_sparse_ns)
    rep.block_sparse = check_block_sparse(h, b_stack, *opts.block_sparse_ns,
                                          opts.rank_tol, opts.brute_budget,
                                          opts.seed);
  return rep;
}

namespace {
std::string partition_string(const std::vector<std::vector<int>>& sets) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (i) os << "|";
    os << join_ints(sets[i]);
  }
  return os.str();
}
}  // namespace

std::string report_to_text(const UniquenessReport& rep) {
  std::ostringstream os;
  os << "uniqueness audit, transverse block q = " << rep.q << "\n";
  os << "  dims: nk = " << rep.nk << ", nf = " << rep.nf << ", ns = " << rep.ns
     << ", passband rank r = " << rep.r << "\n";
  if (rep.degenerate) {
    os << "  block is outside the passband (zero kernel); nothing to audit\n";
    return os.str();
  }
  os << "  max principal angle between per-plane passbands: "
     << rep.max_plane_angle << " rad\n";
  auto line = [&os](const char* name, const ConditionResult& c) {
    os << "  " << name << ": " << (c.pass ? "pass" : "FAIL");
    if (c.sampled) os << " (sampled)";
    os << " -- " << c.diagnostic << "\n";
  };
  line("N1 measurement count", rep.necessary.n1);
  line("N2 spectra rank", rep.necessary.n2);
  line("N3 kernel row coupling", rep.necessary.n3);
  line("N4 subset rank transfer", rep.necessary.n4);
  line("N5 focal-plane contribution", rep.necessary.n5);
  os << "  sufficient partition: ";
  if (!rep.sufficient.applicable)
    os << "inapplicable (" << rep.sufficient.note << ")\n";
  else if (rep.sufficient.pass)
    os << "pass, {J_i} = " << partition_string(rep.sufficient.partition) << " ("
       << rep.sufficient.note << ")\n";
  else
    os << "FAIL (" << rep.sufficient.note << ")\n";
  os << "  kruskal rank of restricted stack: " << rep.kruskal.k
     << (rep.kruskal.lower_bound ? " (lower bound, budget hit)" : "")
     << (rep.kruskal_full ? ", full" : "") << "\n";
  os << "  measured rank of restricted system: " << rep.rank_restricted
     << " of " << rep.ns * rep.r << ", spectral gap at cut " << rep.rank_gap
     << "\n";
  if (!rep.rank_matches_sufficient)
    os << "  WARNING: sufficient condition passed but measured rank disagrees\n";
  if (rep.block_sparse) {
    os << "  block-sparse (dictionary) condition: "
       << (rep.block_sparse->theorem_pass ? "pass" : "FAIL");
    if (rep.block_sparse->brute_checked)
      os << "; brute-force support check: "
         << (rep.block_sparse->brute_pass ? "pass" : "FAIL");
    os << " -- " << rep.block_sparse->note << "\n";
  }
  return os.str();
}

std::string report_to_keyvalue(const UniquenessReport& rep) {
  std::ostringstream os;
  os << "q = " << rep.q << "\n";
  os << "nk = " << rep.nk << "\n";
  os << "nf = " << rep.nf << "\n";
  os << "ns = " << rep.ns << "\n";
  os << "r = " << rep.r << "\n";
  os << "degenerate = " << (rep.degenerate ? "true" : "false") << "\n";
  if (rep.degenerate) return os.str();
  os << "max_plane_angle_rad = " << rep.max_plane_angle << "\n";
  auto cond = [&os](const char* key, const ConditionResult& c) {
    os << key << ".pass = " << (c.pass ? "true" : "false") << "\n";
    os << key << ".sampled = " << (c.sampled ? "true" : "false") << "\n";
    os << key << ".diagnostic = " << c.diagnostic << "\n";
  };
  cond("n1", rep.necessary.n1);
  cond("n2", rep.necessary.n2);
  cond("n3", rep.necessary.n3);
  cond("n4", rep.necessary.n4);
  cond("n5", rep.necessary.n5);
  os << "sufficient.applicable = " << (rep.sufficient.applicable ? "true" : "false") << "\n";
  os << "sufficient.pass = " << (rep.sufficient.pass ? "true" : "false") << "\n";
  os << "sufficient.conclusive = " << (rep.sufficient.conclusive ? "true" : "false") << "\n";
  os << "sufficient.partition = " << partition_string(rep.sufficient.partition) << "\n";
  os << "sufficient.note = " << rep.sufficient.note << "\n";
  os << "kruskal.value = " << rep.kruskal.k << "\n";
  os << "kruskal.lower_bound = " << (rep.kruskal.lower_bound ? "true" : "false") << "\n";
  os << "kruskal.full = " << (rep.kruskal_full ? "true" : "false") << "\n";
  os << "rank.restricted = " << rep.rank_restricted << "\n";
  os << "rank.expected = " << rep.ns * rep.r << "\n";
  os << "rank.gap = " << rep.rank_gap << "\n";
  os << "rank.matches_sufficient = " << (rep.rank_matches_sufficient ? "true" : "false") << "\n";
  if (rep.block_sparse) {
    os << "block_sparse.pass = " << (rep.block_sparse->theorem_pass ? "true" : "false") << "\n";
    os << "block_sparse.brute_checked = " << (rep.block_sparse->brute_checked ? "true" : "false") << "\n";
    os << "block_sparse.brute_pass = " << (rep.block_sparse->brute_pass ? "true" : "false") << "\n";
    os << "block_sparse.note = " << rep.block_sparse->note << "\n";
  }
  return os.str();
}

}  // namespace spectom
