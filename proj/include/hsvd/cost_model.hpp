#pragma once

// Analytic alpha-beta-gamma cost model for the hierarchical SVD.
//
// alpha: latency per message [s], beta: time per word [s], gamma: time per flop [s].
// A sequential SVD of a D x N matrix is charged 2 N D^2 + 2 D^3 flops. The
// parallel run charges one block SVD, 2 (N/m) D^2 + 2 D^3, plus q proxy SVDs
// of a D x (d n) matrix: 2 d n D^2 + 2 D^3 when d n >= D, otherwise
// 2 (d n)^2 D + 2 (d n)^3.

#include <hsvd/error.hpp>

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

namespace hsvd {

struct CostParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 1.0;
  std::int64_t d_rows = 1;  ///< D
  std::int64_t n_cols = 1;  ///< N
  std::int64_t d = 1;       ///< target rank
  std::int64_t n = 2;       ///< children per merge
  std::int64_t q = 1;       ///< levels
  std::int64_t m = 2;       ///< cores == blocks
  /// Accept m != n^q (the tree then has a short last group).
  bool override_m = false;
};

enum class ProxyBranch { WideProxy, NarrowProxy };

constexpr std::string_view to_string(ProxyBranch b) {
  return b == ProxyBranch::WideProxy ? "WideProxy" : "NarrowProxy";
}

struct CostReport {
  std::int64_t m = 1;
  std::int64_t q = 0;
  std::int64_t n = 2;
  double sequential_flops = 0.0;
  double parallel_flops = 0.0;
  double comm_seconds = 0.0;
  double broadcast_seconds = 0.0;
  double speedup = 1.0;
  double efficiency = 1.0;
  ProxyBranch branch = ProxyBranch::WideProxy;
};

/// Throws on negative rates, non-positive sizes, n < 2, or m != n^q without override.
void validate(const CostParams& p);

/// q (alpha + d (n - 1) D beta)
double comm_cost(const CostParams& p);

/// alpha + d m beta
double broadcast_cost(const CostParams& p);

/// d n >= D selects the wide-proxy flop count.
ProxyBranch proxy_branch(const CostParams& p);

CostReport speedup(const CostParams& p);

struct TableOptions {
  /// Weak scaling: p.n_cols is the per-core width, so N = n_cols * m.
  bool weak_scaling = true;
  /// Reject m that is not an exact power of n.
  bool strict = true;
};

/// One report per m, with q = round(log_n m).
std::vector<CostReport> efficiency_table(const CostParams& p, const std::vector<std::int64_t>& m_values,
                                         TableOptions options = {});

/// "m,q,n,branch,speedup,efficiency,comm_seconds"
std::string_view cost_csv_header();
void write_cost_row(std::ostream& out, const CostReport& r);

}  // namespace hsvd
