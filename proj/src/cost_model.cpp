#include <hsvd/cost_model.hpp>
#include <hsvd/csv.hpp>

#include <cmath>
#include <string>

namespace hsvd {
namespace {

// Flop counts stay below 2^64, so long double holds them exactly.
using Exact = long double;

std::int64_t int_pow(std::int64_t base, std::int64_t exp) {
  std::int64_t r = 1;
  for (std::int64_t i = 0; i < exp; ++i) {
    if (r > (std::int64_t{1} << 62) / base) return -1;
    r *= base;
  }
  return r;
}

}  // namespace

void validate(const CostParams& p) {
  if (!(p.alpha >= 0.0) || !(p.beta >= 0.0) || !(p.gamma >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "alpha, beta and gamma must be non-negative");
  if (p.d_rows < 1 || p.n_cols < 1 || p.d < 1) throw Error(ErrorKind::InvalidArgument, "D, N and d must be >= 1");
  if (p.n < 2) throw Error(ErrorKind::InvalidArgument, "group size n must be >= 2");
  if (p.q < 0 || p.m < 1) throw Error(ErrorKind::InvalidArgument, "q must be >= 0 and m >= 1");
  if (!p.override_m && int_pow(p.n, p.q) != p.m)
    throw Error(ErrorKind::NonIntegerLevels,
                "m = " + std::to_string(p.m) + " is not n^q for n = " + std::to_string(p.n) +
                    ", q = " + std::to_string(p.q));
}

double comm_cost(const CostParams& p) {
  validate(p);
  const Exact words = Exact(p.d) * Exact(p.n - 1) * Exact(p.d_rows);
  return static_cast<double>(Exact(p.q) * (Exact(p.alpha) + words * Exact(p.beta)));
}

double broadcast_cost(const CostParams& p) {
  validate(p);
  return static_cast<double>(Exact(p.alpha) + Exact(p.d) * Exact(p.m) * Exact(p.beta));
}

ProxyBranch proxy_branch(const CostParams& p) {
  return p.d * p.n >= p.d_rows ? ProxyBranch::WideProxy : ProxyBranch::NarrowProxy;
}

CostReport speedup(const CostParams& p) {
  validate(p);
  if (p.alpha == 0.0 && p.beta == 0.0 && p.gamma == 0.0)
    throw Error(ErrorKind::ZeroDenominator, "alpha, beta and gamma are all zero");

  const Exact D = Exact(p.d_rows), N = Exact(p.n_cols), m = Exact(p.m);
  const Exact dn = Exact(p.d) * Exact(p.n);

  CostReport r;
  r.m = p.m;
  r.q = p.q;
  r.n = p.n;
  r.branch = proxy_branch(p);

  const Exact sequential = 2 * N * D * D + 2 * D * D * D;
  const Exact proxy = r.branch == ProxyBranch::WideProxy ? 2 * dn * D * D + 2 * D * D * D
                                                         : 2 * dn * dn * D + 2 * dn * dn * dn;
  // m * (parallel flops), so that N/m never rounds.
  const Exact parallel_times_m = 2 * N * D * D + m * (2 * D * D * D + Exact(p.q) * proxy);
  const Exact comm = Exact(comm_cost(p));

  r.sequential_flops = static_cast<double>(sequential);
  r.parallel_flops = static_cast<double>(parallel_times_m / m);
  r.comm_seconds = static_cast<double>(comm);
  r.broadcast_seconds = broadcast_cost(p);

  if (p.q == 0) {
    r.parallel_flops = r.sequential_flops;
    r.speedup = 1.0;
  } else {
    const Exact numerator = m * Exact(p.gamma) * sequential;
    const Exact denominator = Exact(p.gamma) * parallel_times_m + m * comm;
    if (denominator == 0) throw Error(ErrorKind::ZeroDenominator, "parallel cost is zero");
    r.speedup = static_cast<double>(numerator / denominator);
  }
  r.efficiency = r.speedup / static_cast<double>(p.m);
  return r;
}

std::vector<CostReport> efficiency_table(const CostParams& p, const std::vector<std::int64_t>& m_values,
                                         TableOptions options) {
  std::vector<CostReport> rows;
  rows.reserve(m_values.size());
  for (const std::int64_t m : m_values) {
    if (m < 1) throw Error(ErrorKind::InvalidArgument, "m must be >= 1");
    CostParams row = p;
    row.m = m;
    row.q = static_cast<std::int64_t>(std::llround(std::log(static_cast<double>(m)) / std::log(double(p.n))));
    row.override_m = !options.strict;
    if (options.strict && int_pow(p.n, row.q) != m)
      throw Error(ErrorKind::NonIntegerLevels,
                  "m = " + std::to_string(m) + " is not a power of n = " + std::to_string(p.n));
    if (options.weak_scaling) row.n_cols = p.n_cols * m;
    rows.push_back(speedup(row));
  }
  return rows;
}

std::string_view cost_csv_header() { return "m,q,n,branch,speedup,efficiency,comm_seconds"; }

void write_cost_row(std::ostream& out, const CostReport& r) {
  out << (CsvRow() << r.m << r.q << r.n << to_string(r.branch) << r.speedup << r.efficiency << r.comm_seconds);
}

}  // namespace hsvd
