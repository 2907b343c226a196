#pragma once

// File-level commands behind the `hsvd` CLI: generate, partition, run,
// compare, cost tables and the scenario grids.
//
// Exit codes: 0 success, 2 validation error, 3 numerical bound failure,
// 4 I/O error.

#include <hsvd/config.hpp>
#include <hsvd/cost_model.hpp>
#include <hsvd/error.hpp>
#include <hsvd/metrics.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace hsvd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitBound = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorKind kind);

/// HSVD_WORKERS if set and valid, else 1.
std::size_t default_workers();

// ---------------------------------------------------------------- gen

struct GenOptions {
  Eigen::Index rows = 40;
  Eigen::Index cols = 1280;
  Eigen::Index blocks = 1;
  std::vector<Eigen::Index> widths;  ///< empty: balanced
  std::uint64_t seed = 7;
  std::optional<Eigen::Index> rank;  ///< head length d; absent: full-rank linear 10..1 spectrum
  double tail_sq = 0.0;              ///< squared Frobenius tail beyond `rank`
  std::filesystem::path out_dir;
};

/// Spectrum used by gen for the given options.
VectorXd gen_spectrum(const GenOptions& options);

/// Writes blocks, manifest.txt and spectrum.csv ("index,sigma,tail_sq", where
/// tail_sq is the sum of sigma_i^2 over i > index). Returns the manifest path.
std::filesystem::path cmd_gen(const GenOptions& options);

// ---------------------------------------------------------------- partition

std::filesystem::path cmd_partition(const std::filesystem::path& matrix_file, Eigen::Index blocks,
                                    const std::vector<Eigen::Index>& widths, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------- run

struct RunOptions {
  std::filesystem::path manifest;
  int n = 2;
  std::optional<int> q;              ///< default: ceil(log_n M)
  std::optional<Eigen::Index> d;     ///< default: D
  std::size_t workers = 1;
  bool right_vectors = false;
  std::filesystem::path out_dir;
};

/// Writes u.bin (U'), sigma.csv, plan.txt, root.bin/root.meta, timing.log and,
/// when requested, v.bin. Everything except timing.log is independent of the
/// worker count.
PartialSVDd cmd_run(const RunOptions& options);

// ---------------------------------------------------------------- compare

struct CompareOptions {
  std::filesystem::path result_dir;
  /// A manifest (direct SVD of the assembled matrix) or another result directory.
  std::filesystem::path reference;
  std::optional<Eigen::Index> k;  ///< default: the result's rank
  bool check_bound = false;
};

struct CompareOutcome {
  ComparisonReport report;
  bool bound_checked = false;
};

/// Writes the header and one row to `out`.
CompareOutcome cmd_compare(const CompareOptions& options, std::ostream& out);

// ---------------------------------------------------------------- cost

struct CostOptions {
  CostParams params;
  std::vector<std::int64_t> m_values{1, 2, 4, 8, 16};
  TableOptions table;
  bool published_grid = false;
};

/// Emits CSV rows. With published_grid, emits both weak-scaling families
/// (D = 2000, 32000 columns per core, d in {2000, 200}, n in {2, 3, 4}) with a
/// leading `d` column.
void cmd_cost(const CostOptions& options, std::ostream& out);

/// The m values of the published weak-scaling curves for n in {2, 3, 4}.
std::vector<std::int64_t> published_m_values(int n);

// ---------------------------------------------------------------- experiment

enum class ExperimentMode { FullRank, LowRank, Noise, Cost };

ExperimentMode parse_mode(std::string_view text);
std::string_view to_string(ExperimentMode mode);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::FullRank;
  Eigen::Index rows = 40;
  Eigen::Index cols = 1280;
  std::uint64_t seed = 7;
  std::vector<double> tail_sq{0.1, 0.01};
  std::vector<std::pair<int, int>> grid;  ///< (n, q); empty: default grid
  std::vector<Eigen::Index> d_values;     ///< empty: D (FullRank) or 8
  std::size_t workers = 1;
  std::filesystem::path out_dir;
  bool large = false;

  /// Keys: mode, rows, cols, seed, tail_sq, grid (n:q,...), d, workers, out, large.
  static ExperimentConfig from_config(const KeyValueConfig& cfg);
  void validate() const;
  std::vector<std::pair<int, int>> effective_grid() const;
  std::vector<Eigen::Index> effective_d() const;
};

struct ExperimentRow {
  std::string mode;
  double tail_sq = 0.0;
  int n = 0;
  int q = 0;
  Eigen::Index blocks = 0;
  Eigen::Index block_width = 0;
  Eigen::Index d = 0;
  ComparisonReport report;
  double block_residual = 0.0;  ///< Noise: worst one-block aligned error
  double block_bound = 0.0;     ///< Noise: its sqrt(2) * block tail
  bool passed = true;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> failures;
  bool all_passed() const;
};

/// Runs the grid, writing summary.csv (and failures.txt if any cell threw)
/// into cfg.out_dir when it is non-empty.
ExperimentResult cmd_experiment(const ExperimentConfig& cfg);

std::string_view experiment_csv_header();
void write_experiment_row(std::ostream& out, const ExperimentRow& row);

}  // namespace hsvd
