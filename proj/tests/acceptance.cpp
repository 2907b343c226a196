// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <hsvd/block_store.hpp>
#include <hsvd/cost_model.hpp>
#include <hsvd/harness.hpp>
#include <hsvd/merge_engine.hpp>
#include <hsvd/metrics.hpp>
#include <hsvd/synthgen.hpp>

#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hsvd;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// Frobenius distance from A to its best rank-d approximation, from a direct SVD.
double best_tail(const MatrixXd& a, Eigen::Index d) {
  const VectorXd s = Eigen::JacobiSVD<MatrixXd>(a).singularValues();
  return d >= s.size() ? 0.0 : s.tail(s.size() - d).norm();
}

// Rank-d truncation A_d computed straight from Eigen, independent of the library.
MatrixXd best_rank(const MatrixXd& a, Eigen::Index d) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index k = std::min<Eigen::Index>(d, svd.singularValues().size());
  return svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() * svd.matrixV().leftCols(k).transpose();
}

double bound_q(int q, double tail) { return (std::pow(1.0 + std::sqrt(2.0), q + 1) - 1.0) * tail; }

std::vector<MatrixXd> split(const MatrixXd& a, Eigen::Index m) {
  std::vector<MatrixXd> out;
  const auto widths = balanced_widths(a.cols(), m);
  Eigen::Index col = 0;
  for (auto w : widths) {
    out.push_back(a.middleCols(col, w));
    col += w;
  }
  return out;
}

Outcome exact_recovery() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::FullRank;
  cfg.rows = 40;
  cfg.cols = 1280;
  const auto result = cmd_experiment(cfg);
  bool has_n2 = false, has_n4 = false;
  double worst_sigma = 0.0, worst_angle = 0.0;
  bool ok = result.failures.empty() && !result.rows.empty();
  for (const auto& row : result.rows) {
    has_n2 |= row.n == 2;
    has_n4 |= row.n == 4;
    worst_sigma = std::max(worst_sigma, row.report.e_sigma);
    worst_angle = std::max(worst_angle, row.report.max_angle());
    ok &= row.d == 40 && row.report.k == 40;
  }
  const double t = seconds_since(t0);
  ok &= has_n2 && has_n4 && worst_sigma <= 1e-10 && worst_angle <= 1e-7 && t < 30.0;
  return {ok, std::to_string(result.rows.size()) + " cells, max e_sigma " + fmt(worst_sigma) + ", max angle " +
                  fmt(worst_angle) + " rad, " + fmt(t) + " s"};
}

Outcome low_rank() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  cfg.mode = ExperimentMode::LowRank;
  cfg.rows = 40;
  cfg.cols = 1280;
  cfg.d_values = {8};
  cfg.tail_sq = {0.1, 0.01};
  const auto result = cmd_experiment(cfg);
  bool ok = result.failures.empty() && !result.rows.empty();
  double worst_ratio = 0.0, worst_sigma_small_tail = 0.0;
  for (const auto& row : result.rows) {
    const double bound = bound_q(row.q, std::sqrt(row.tail_sq));
    worst_ratio = std::max(worst_ratio, row.report.procrustes_residual / bound);
    ok &= row.report.procrustes_residual <= bound && row.report.bound_satisfied;
    if (row.tail_sq == 0.01) worst_sigma_small_tail = std::max(worst_sigma_small_tail, row.report.e_sigma);
  }
  const double t = seconds_since(t0);
  ok &= worst_sigma_small_tail <= 1e-6 && t < 60.0;
  return {ok, std::to_string(result.rows.size()) + " cells, max residual/bound " + fmt(worst_ratio) +
                  ", max e_sigma (tail^2=0.01) " + fmt(worst_sigma_small_tail) + ", " + fmt(t) + " s"};
}

Outcome one_level_perturbation() {
  constexpr Eigen::Index D = 20, N = 160, d = 4, M = 4;
  int trials = 0, passed = 0;
  double worst_ratio = 0.0;
  for (const double psi_scale : {0.0, 0.1, 1.0}) {
    for (int t = 0; t < 100; ++t) {
      const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(t);
      const double tail_sq = 0.01 + 0.99 * std::abs(gaussian_at(seed, 9, 0)) / 3.0;
      const MatrixXd a = matrix_with_spectrum({D, N, spectrum_with_tail(D, d, std::nullopt, tail_sq), seed});
      const double tail = best_tail(a, d);

      std::vector<PartialSVDd> leaves;
      Eigen::Index col = 0;
      for (const auto& block : split(a, M)) {
        leaves.push_back(leaf_svd(block, d, ColumnSpan{col, block.cols()}));
        col += block.cols();
      }
      const MatrixXd proxy = proxy_matrix(leaves, d);
      MatrixXd psi = gaussian_matrix(proxy.rows(), proxy.cols(), seed, 3);
      const double psi_norm = psi_scale * tail;
      psi *= psi_norm / psi.norm();
      const PartialSVDd merged{truncate(svd_reduced(MatrixXd(proxy + psi), std::nullopt, false), d), {0, N}};

      const double residual = aligned_residual(merged, a, d);
      const double bound = 3.0 * std::sqrt(2.0) * tail + (1.0 + std::sqrt(2.0)) * psi_norm;
      worst_ratio = std::max(worst_ratio, residual / bound);
      ++trials;
      passed += residual <= bound;
    }
  }
  return {passed == trials,
          std::to_string(passed) + "/" + std::to_string(trials) + " trials, max residual/bound " + fmt(worst_ratio)};
}

Outcome noise_stability() {
  constexpr Eigen::Index D = 20, w = 60, d = 4;
  int passed = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(t);
    const double tail_sq = 0.01 + std::abs(gaussian_at(seed, 9, 0)) / 3.0;
    const MatrixXd block = matrix_with_spectrum({D, w, spectrum_with_tail(D, d, std::nullopt, tail_sq), seed});
    const double block_tail = best_tail(block, d);
    MatrixXd e = gaussian_matrix(D, w, seed, 2);
    e *= (std::sqrt(2.0) - 1.0) / (std::sqrt(double(D - d)) + 1.0) * block_tail / e.norm();
    const double residual = aligned_residual(leaf_svd(MatrixXd(block + e), d, {0, w}), block, d);
    const double bound = std::sqrt(2.0) * block_tail;
    worst_ratio = std::max(worst_ratio, residual / bound);
    passed += residual <= bound;
  }
  return {passed == 100, std::to_string(passed) + "/100 trials, max residual/bound " + fmt(worst_ratio)};
}

Outcome block_merge() {
  std::mt19937_64 rng(20240611);
  int checks = 0, violations = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    const MatrixXd a = gaussian_matrix(10, 60, rng(), 0);
    const double scale = a.norm();
    for (Eigen::Index d = 1; d <= 10; ++d) {
      MatrixXd b(10, 60);
      for (Eigen::Index i = 0; i < 4; ++i) b.middleCols(15 * i, 15) = best_rank(a.middleCols(15 * i, 15), d);
      const double lhs = (best_rank(b, d) - a).norm();
      const double rhs = 3.0 * (best_rank(a, d) - a).norm();
      if (rhs > 0) worst_ratio = std::max(worst_ratio, lhs / rhs);
      ++checks;
      violations += lhs > rhs + kBoundSlack * scale;
    }
  }
  return {violations == 0, std::to_string(checks) + " checks, " + std::to_string(violations) +
                               " violations, max lhs/rhs " + fmt(worst_ratio)};
}

Outcome cost_golden() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Curve {
    std::int64_t d;
    std::int64_t n;
    std::vector<double> expected;
  };
  const std::vector<Curve> curves{
      {2000, 2, {1.65, 2.83, 4.96, 8.86, 16, 29.3, 53.9, 99.9, 186}},
      {2000, 3, {2.33, 5.8, 14.94, 39.3, 105}},
      {2000, 4, {2.95, 9.51, 32.0, 110.7}},
      {200, 2, {1.94, 3.80, 7.52, 14.95, 29.76, 59.29, 118.19, 236.68, 470.00}},
      {200, 3, {2.86, 8.41, 24.96, 74.25, 221.15}},
      {200, 4, {3.77, 14.73, 58.00, 228.94}},
  };
  int total = 0, within = 0;
  double worst = 0.0;
  std::string misses;
  for (const auto& c : curves) {
    CostParams p;
    p.d_rows = 2000;
    p.n_cols = 32000;
    p.d = c.d;
    p.n = c.n;
    std::vector<std::int64_t> ms;
    std::int64_t m = 1;
    for (std::size_t i = 0; i < c.expected.size(); ++i) ms.push_back(m *= c.n);
    const auto table = efficiency_table(p, ms);
    for (std::size_t i = 0; i < c.expected.size(); ++i) {
      const double err = std::abs(table[i].speedup - c.expected[i]);
      worst = std::max(worst, err);
      ++total;
      if (err <= 0.01) {
        ++within;
      } else {
        misses += " (d=" + std::to_string(c.d) + ",n=" + std::to_string(c.n) + ",m=" + std::to_string(ms[i]) +
                  ": " + fmt(table[i].speedup, 6) + " vs " + fmt(c.expected[i], 6) + ")";
      }
    }
  }
  const double t = seconds_since(t0);
  return {within == total && t < 1.0, std::to_string(within) + "/" + std::to_string(total) +
                                          " within 0.01, max |diff| " + fmt(worst) + ", " + fmt(t) + " s" +
                                          (misses.empty() ? "" : ";" + misses)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(77);
  auto pick = [&](std::int64_t lo, std::int64_t hi) { return lo + static_cast<std::int64_t>(rng() % (hi - lo + 1)); };
  int passed = 0;
  double worst_sigma = 0.0, worst_angle = 0.0;
  for (int t = 0; t < 500; ++t) {
    const Eigen::Index D = pick(1, 12);
    const Eigen::Index N = pick(D, 48);
    const Eigen::Index r = pick(1, D);
    const std::uint64_t seed = rng();
    const MatrixXd a = gaussian_matrix(D, r, seed, 0) * gaussian_matrix(r, N, seed, 1);
    const int n = static_cast<int>(pick(2, 4));
    const Eigen::Index m = pick(1, std::min<Eigen::Index>(N, 16));
    const int q = levels_needed(m, n) + static_cast<int>(pick(0, 1));

    const auto result = hierarchical_svd(split(a, m), MergePlan{q, n, r, m});
    Eigen::JacobiSVD<MatrixXd> direct(a, Eigen::ComputeThinU);
    const VectorXd s = direct.singularValues().head(r);
    const MatrixXd u = direct.matrixU().leftCols(r);

    bool ok = result.factors.rank() == r;
    if (ok) {
      const double e_sigma = ((result.factors.sigma - s).cwiseAbs().array() / s.array()).maxCoeff();
      // sine of the largest principal angle is the spectral norm of (I - U U^T) U_test
      const MatrixXd residual = result.factors.u - u * (u.transpose() * result.factors.u);
      const double sine = Eigen::JacobiSVD<MatrixXd>(residual).singularValues()(0);
      const double angle = std::asin(std::min(1.0, sine));
      worst_sigma = std::max(worst_sigma, e_sigma);
      worst_angle = std::max(worst_angle, angle);
      ok = e_sigma <= 1e-10 && angle <= 1e-8;
    }
    passed += ok;
  }
  return {passed == 500, std::to_string(passed) + "/500 matrices, max e_sigma " + fmt(worst_sigma) + ", max angle " +
                             fmt(worst_angle) + " rad"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism_and_format() {
  const fs::path root = fs::temp_directory_path() / ("hsvd_acceptance_" + std::to_string(std::random_device{}()));
  fs::remove_all(root);
  GenOptions gen;
  gen.rows = 24;
  gen.cols = 600;
  gen.blocks = 27;
  gen.rank = 6;
  gen.tail_sq = 0.05;
  gen.out_dir = root / "gen";
  const auto manifest = cmd_gen(gen);

  const std::array<std::string, 6> files{"u.bin", "sigma.csv", "plan.txt", "root.bin", "root.meta", "v.bin"};
  std::vector<std::string> baseline;
  bool identical = true;
  for (std::size_t workers : {1u, 2u, 8u}) {
    RunOptions run;
    run.manifest = manifest;
    run.n = 3;
    run.d = 6;
    run.workers = workers;
    run.right_vectors = true;
    run.out_dir = root / ("w" + std::to_string(workers));
    cmd_run(run);
    std::vector<std::string> contents;
    for (const auto& f : files) contents.push_back(slurp(run.out_dir / f));
    if (baseline.empty()) baseline = contents;
    else identical &= contents == baseline;
  }
  for (const auto& c : baseline) identical &= !c.empty();
  fs::remove_all(root);

  std::mt19937_64 rng(4242);
  int exact = 0;
  for (int t = 0; t < 10000; ++t) {
    const Eigen::Index rows = 1 + static_cast<Eigen::Index>(rng() % 9);
    const Eigen::Index cols = 1 + static_cast<Eigen::Index>(rng() % 9);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double x;
      do x = std::bit_cast<double>(rng());
      while (!std::isfinite(x));
      m.data()[i] = x;
    }
    std::stringstream buf;
    write_block(buf, m);
    const MatrixXd back = read_block(buf);
    exact += back.rows() == rows && back.cols() == cols &&
             std::memcmp(back.data(), m.data(), sizeof(double) * static_cast<std::size_t>(m.size())) == 0 &&
             buf.str().size() == kBlockHeaderBytes + 8 * static_cast<std::size_t>(m.size());
  }
  return {identical && exact == 10000, std::string("workers {1,2,8} ") + (identical ? "bitwise identical" : "DIFFER") +
                                           ", " + std::to_string(exact) + "/10000 round trips exact"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"exact recovery (40x1280, rank 40)", exact_recovery},
      {"low-rank bound and accuracy (40x1280, d=8)", low_rank},
      {"one-level merge with perturbed proxy", one_level_perturbation},
      {"noise stability of a contaminated block", noise_stability},
      {"block-merge inequality (10x60, M=4, d=1..10)", block_merge},
      {"cost-model weak-scaling speedups", cost_golden},
      {"oracle equivalence with direct SVD (500 matrices)", oracle_equivalence},
      {"determinism across workers and block format round trips", determinism_and_format},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].name << ": " << o.detail << '\n';
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
