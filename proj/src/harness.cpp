#include <hsvd/harness.hpp>

#include <hsvd/block_store.hpp>
#include <hsvd/csv.hpp>
#include <hsvd/partial_io.hpp>
#include <hsvd/synthgen.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hsvd {
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::BadMagic:
    case ErrorKind::BadVersion:
    case ErrorKind::TruncatedFile:
    case ErrorKind::NonFinitePayload:
    case ErrorKind::BadManifest:
      return kExitIo;
    case ErrorKind::ConvergenceFailure:
      return kExitBound;
    default:
      return kExitValidation;
  }
}

std::size_t default_workers() {
  if (const char* env = std::getenv("HSVD_WORKERS")) {
    try {
      const auto v = parse_int(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const Error&) {
    }
  }
  return 1;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create directory '" + dir.string() + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

VectorXd linear_spectrum(Eigen::Index count) {
  VectorXd s(count);
  for (Eigen::Index j = 0; j < count; ++j) s(j) = count == 1 ? 10.0 : 10.0 - 9.0 * double(j) / double(count - 1);
  return s;
}

void write_sigma_csv(const fs::path& path, const VectorXd& sigma) {
  auto out = open_out(path);
  out << "index,sigma\n";
  for (Eigen::Index j = 0; j < sigma.size(); ++j) out << (CsvRow() << static_cast<std::int64_t>(j + 1) << sigma(j));
}

VectorXd read_sigma_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() < 2) throw Error(ErrorKind::BadManifest, "malformed row in '" + path.string() + "'");
    values.push_back(parse_double(cells[1]));
  }
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct StoredResult {
  MatrixXd u;
  VectorXd sigma;
  KeyValueConfig plan;
};

StoredResult load_result(const fs::path& dir) {
  StoredResult r;
  r.u = read_block(dir / "u.bin");
  r.sigma = read_sigma_csv(dir / "sigma.csv");
  if (r.sigma.size() != r.u.cols()) throw Error(ErrorKind::ShapeMismatch, "u.bin and sigma.csv disagree on rank");
  if (fs::exists(dir / "plan.txt")) r.plan = KeyValueConfig::load(dir / "plan.txt");
  return r;
}

std::vector<std::pair<int, int>> default_grid(Eigen::Index cols) {
  std::vector<std::pair<int, int>> grid;
  for (int q = 1; q <= 8 && (Eigen::Index{1} << q) <= cols; ++q) grid.emplace_back(2, q);
  for (int q = 1, m = 4; q <= 3 && m <= cols; ++q, m *= 4) grid.emplace_back(4, q);
  return grid;
}

Eigen::Index int_pow(int n, int q) {
  Eigen::Index m = 1;
  for (int i = 0; i < q; ++i) m *= n;
  return m;
}

}  // namespace

// ---------------------------------------------------------------- gen

VectorXd gen_spectrum(const GenOptions& o) {
  if (!o.rank) {
    if (o.tail_sq != 0.0) throw Error(ErrorKind::BadConfig, "tail_sq needs a rank");
    return linear_spectrum(o.rows);
  }
  if (*o.rank < 1 || *o.rank > o.rows) throw Error(ErrorKind::BadConfig, "rank must lie in [1, D]");
  if (*o.rank == o.rows) {
    if (o.tail_sq != 0.0) throw Error(ErrorKind::BadConfig, "rank = D leaves no tail");
    return linear_spectrum(o.rows);
  }
  return spectrum_with_tail(o.rows, *o.rank, std::nullopt, o.tail_sq);
}

fs::path cmd_gen(const GenOptions& o) {
  if (o.rows < 1 || o.cols < o.rows) throw Error(ErrorKind::BadConfig, "need 1 <= D <= N");
  if (o.out_dir.empty()) throw Error(ErrorKind::BadConfig, "an output directory is required");
  const VectorXd sigma = gen_spectrum(o);
  const MatrixXd a = matrix_with_spectrum({o.rows, o.cols, sigma, o.seed});
  const BlockSet blocks = partition(a, o.blocks, o.widths);

  ensure_dir(o.out_dir);
  const fs::path manifest = write_block_set(o.out_dir, blocks);
  auto out = open_out(o.out_dir / "spectrum.csv");
  out << "index,sigma,tail_sq\n";
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    const double tail = frobenius_tail(sigma, j + 1);
    out << (CsvRow() << static_cast<std::int64_t>(j + 1) << sigma(j) << tail * tail);
  }
  return manifest;
}

// ---------------------------------------------------------------- partition

fs::path cmd_partition(const fs::path& matrix_file, Eigen::Index blocks, const std::vector<Eigen::Index>& widths,
                       const fs::path& out_dir) {
  const MatrixXd a = read_block(matrix_file);
  const BlockSet set = partition(a, blocks, widths);
  ensure_dir(out_dir);
  return write_block_set(out_dir, set);
}

// ---------------------------------------------------------------- run

PartialSVDd cmd_run(const RunOptions& o) {
  if (o.out_dir.empty()) throw Error(ErrorKind::BadConfig, "an output directory is required");
  const BlockSet blocks = open_block_set(o.manifest);
  MergePlan plan;
  plan.n = o.n;
  plan.m = blocks.size();
  plan.q = o.q.value_or(levels_needed(blocks.size(), std::max(o.n, 2)));
  plan.d = o.d.value_or(blocks.rows());
  if (plan.d < 1 || plan.d > blocks.rows()) throw Error(ErrorKind::BadConfig, "d must lie in [1, D]");
  const int levels = effective_levels(plan, blocks.size());

  const auto start = std::chrono::steady_clock::now();
  PartialSVDd root = hierarchical_svd(blocks, plan, o.workers);
  const auto merged = std::chrono::steady_clock::now();

  ensure_dir(o.out_dir);
  write_block(o.out_dir / "u.bin", root.factors.u);
  write_sigma_csv(o.out_dir / "sigma.csv", root.factors.sigma);
  save_partial(o.out_dir / "root", root);
  {
    auto out = open_out(o.out_dir / "plan.txt");
    out << "rows=" << blocks.rows() << "\ncols=" << blocks.cols() << "\nblocks=" << blocks.size() << "\nn=" << plan.n
        << "\nq=" << plan.q << "\nlevels=" << levels << "\nd=" << plan.d << '\n';
  }
  double recover_seconds = 0.0;
  if (o.right_vectors) {
    const auto t0 = std::chrono::steady_clock::now();
    write_block(o.out_dir / "v.bin", recover_right_vectors(blocks, root, o.workers));
    recover_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  auto log = open_out(o.out_dir / "timing.log");
  log << "workers=" << o.workers << "\nhierarchical_seconds="
      << format_double(std::chrono::duration<double>(merged - start).count()) << '\n';
  if (o.right_vectors) log << "right_vector_seconds=" << format_double(recover_seconds) << '\n';
  return root;
}

// ---------------------------------------------------------------- compare

CompareOutcome cmd_compare(const CompareOptions& o, std::ostream& out) {
  const StoredResult result = load_result(o.result_dir);
  PartialSVDd test;
  test.factors.u = result.u;
  test.factors.sigma = result.sigma;
  test.factors.rank_hint = numerical_rank(result.sigma);

  SVDFactorsd reference;
  bool reference_is_matrix = false;
  if (fs::is_directory(o.reference)) {
    const StoredResult ref = load_result(o.reference);
    reference.u = ref.u;
    reference.sigma = ref.sigma;
  } else {
    reference = svd_reduced(concatenate(open_block_set(o.reference)), std::nullopt, false);
    reference_is_matrix = true;
  }
  if (reference.rows() != test.factors.rows()) throw Error(ErrorKind::ShapeMismatch, "row counts differ");

  const Eigen::Index k = o.k.value_or(std::min(test.factors.rank(), reference.rank()));
  CompareOutcome outcome;
  if (o.check_bound) {
    if (!reference_is_matrix) throw Error(ErrorKind::BadConfig, "bound checks need a manifest reference");
    const auto q = result.plan.get_int("levels");
    const auto d = result.plan.get_int("d");
    if (!q || !d) throw Error(ErrorKind::BadManifest, "result has no plan.txt with levels and d");
    outcome.report = compare(test, reference, k, static_cast<int>(*q), frobenius_tail(reference.sigma, *d));
    outcome.bound_checked = true;
  } else {
    outcome.report = compare(test, reference, k, 0);
  }
  out << comparison_csv_header() << '\n';
  write_comparison_row(out, outcome.report);
  return outcome;
}

// ---------------------------------------------------------------- cost

std::vector<std::int64_t> published_m_values(int n) {
  std::vector<std::int64_t> m{1};
  const int count = n == 2 ? 9 : n == 3 ? 5 : n == 4 ? 4 : 0;
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "published curves exist for n = 2, 3, 4 only");
  for (int i = 0; i < count; ++i) m.push_back(m.back() * n);
  return m;
}

void cmd_cost(const CostOptions& o, std::ostream& out) {
  if (!o.published_grid) {
    const auto rows = efficiency_table(o.params, o.m_values, o.table);
    out << cost_csv_header() << '\n';
    for (const auto& r : rows) write_cost_row(out, r);
    return;
  }
  out << "d," << cost_csv_header() << '\n';
  for (const std::int64_t d : {2000, 200}) {
    for (const int n : {2, 3, 4}) {
      CostParams p;
      p.alpha = 0.0;
      p.beta = 0.0;
      p.gamma = 1.0;
      p.d_rows = 2000;
      p.n_cols = 32000;
      p.d = d;
      p.n = n;
      for (const auto& r : efficiency_table(p, published_m_values(n), {.weak_scaling = true, .strict = true})) {
        out << d << ',';
        write_cost_row(out, r);
      }
    }
  }
}

// ---------------------------------------------------------------- experiment

ExperimentMode parse_mode(std::string_view text) {
  if (text == "fullrank" || text == "FullRank") return ExperimentMode::FullRank;
  if (text == "lowrank" || text == "LowRank") return ExperimentMode::LowRank;
  if (text == "noise" || text == "Noise") return ExperimentMode::Noise;
  if (text == "cost" || text == "Cost") return ExperimentMode::Cost;
  throw Error(ErrorKind::BadConfig, "unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::FullRank: return "FullRank";
    case ExperimentMode::LowRank: return "LowRank";
    case ExperimentMode::Noise: return "Noise";
    case ExperimentMode::Cost: return "Cost";
  }
  return "";
}

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& cfg) {
  cfg.require_known({"mode", "rows", "cols", "seed", "tail_sq", "grid", "d", "workers", "out", "large"});
  ExperimentConfig c;
  if (auto v = cfg.get("mode")) c.mode = parse_mode(*v);
  if (auto v = cfg.get("large")) c.large = (*v == "1" || *v == "true");
  if (c.large) {
    c.rows = 400;
    c.cols = 128000;
  }
  if (auto v = cfg.get_int("rows")) c.rows = *v;
  if (auto v = cfg.get_int("cols")) c.cols = *v;
  if (auto v = cfg.get_int("seed")) c.seed = static_cast<std::uint64_t>(*v);
  if (auto v = cfg.get_double_list("tail_sq")) c.tail_sq = *v;
  if (auto v = cfg.get_int_list("d")) c.d_values.assign(v->begin(), v->end());
  if (auto v = cfg.get_int("workers")) {
    if (*v < 1) throw Error(ErrorKind::BadConfig, "workers must be >= 1");
    c.workers = static_cast<std::size_t>(*v);
  }
  if (auto v = cfg.get("out")) c.out_dir = *v;
  if (auto v = cfg.get("grid")) {
    for (const auto& cell : split(*v, ',')) {
      const auto parts = split(cell, ':');
      if (parts.size() != 2) throw Error(ErrorKind::BadConfig, "grid cells are written n:q");
      c.grid.emplace_back(static_cast<int>(parse_int(parts[0])), static_cast<int>(parse_int(parts[1])));
    }
  }
  c.validate();
  return c;
}

std::vector<std::pair<int, int>> ExperimentConfig::effective_grid() const {
  return grid.empty() ? default_grid(cols) : grid;
}

std::vector<Eigen::Index> ExperimentConfig::effective_d() const {
  if (!d_values.empty()) return d_values;
  if (mode == ExperimentMode::FullRank) return {rows};
  return {std::min<Eigen::Index>(8, rows - 1)};
}

void ExperimentConfig::validate() const {
  if (mode == ExperimentMode::Cost) return;
  if (rows < 2 || cols < rows) throw Error(ErrorKind::BadConfig, "need 2 <= rows <= cols");
  if (!large && (rows > 200 || cols > 65536))
    throw Error(ErrorKind::BadConfig, "shapes beyond 200 x 65536 need large=true");
  for (const auto& [n, q] : effective_grid()) {
    if (n < 2 || q < 1) throw Error(ErrorKind::BadConfig, "grid cells need n >= 2 and q >= 1");
    if (int_pow(n, q) > cols) throw Error(ErrorKind::BadConfig, "grid cell has more blocks than columns");
  }
  for (const auto d : effective_d()) {
    if (d < 1 || d > rows) throw Error(ErrorKind::BadConfig, "d must lie in [1, rows]");
    if (mode != ExperimentMode::FullRank && d >= rows) throw Error(ErrorKind::BadConfig, "low-rank modes need d < rows");
  }
  for (const double t : tail_sq)
    if (!(t >= 0.0)) throw Error(ErrorKind::BadConfig, "tail_sq must be >= 0");
}

bool ExperimentResult::all_passed() const {
  if (!failures.empty()) return false;
  for (const auto& r : rows)
    if (!r.passed) return false;
  return true;
}

std::string_view experiment_csv_header() {
  return "mode,tail_sq,n,q,blocks,block_width,d,e_sigma,e_vec,vectors_well_separated,max_principal_angle,"
         "procrustes_residual,bound_value,bound_satisfied,block_residual,block_bound,passed";
}

void write_experiment_row(std::ostream& out, const ExperimentRow& r) {
  out << (CsvRow() << r.mode << r.tail_sq << r.n << r.q << static_cast<std::int64_t>(r.blocks)
                   << static_cast<std::int64_t>(r.block_width) << static_cast<std::int64_t>(r.d) << r.report.e_sigma
                   << r.report.e_vec << r.report.vectors_well_separated << r.report.max_angle()
                   << r.report.procrustes_residual << r.report.bound_value << r.report.bound_satisfied
                   << r.block_residual << r.block_bound << r.passed);
}

namespace {

ExperimentRow run_cell(const ExperimentConfig& cfg, const MatrixXd& a, const SVDFactorsd& reference, double tail_sq,
                       int n, int q, Eigen::Index d) {
  ExperimentRow row;
  row.mode = std::string(to_string(cfg.mode));
  row.tail_sq = tail_sq;
  row.n = n;
  row.q = q;
  row.blocks = int_pow(n, q);
  row.d = d;
  BlockSet blocks = partition(a, row.blocks);
  row.block_width = blocks.width(0);
  const MergePlan plan{q, n, d, row.blocks};
  const double tail = frobenius_tail(reference.sigma, d);

  if (cfg.mode == ExperimentMode::Noise) {
    // Contaminate every block at the largest admissible magnitude, check the
    // one-block error, then run the whole tree on the contaminated blocks.
    std::vector<MatrixXd> noisy;
    double worst_ratio = -1.0;
    for (Eigen::Index i = 0; i < blocks.size(); ++i) {
      const MatrixXd clean = blocks.load(i);
      const SVDFactorsd clean_svd = svd_reduced(clean, std::nullopt, false);
      const double block_tail = frobenius_tail(clean_svd.sigma, d);
      MatrixXd e = gaussian_matrix(clean.rows(), clean.cols(), cfg.seed + 7919 * static_cast<std::uint64_t>(i + 1), 2);
      e *= noise_budget(clean.rows(), std::min(d, clean.rows()), block_tail) / e.norm();
      noisy.push_back(clean + e);

      const double residual = aligned_residual(leaf_svd(noisy.back(), d, {}), clean_svd, d);
      const double bound = noise_bound(block_tail);
      const double allowed = bound + kBoundSlack * clean_svd.sigma.norm();
      if (residual > allowed) row.passed = false;
      if (residual / allowed > worst_ratio) {
        worst_ratio = residual / allowed;
        row.block_residual = residual;
        row.block_bound = bound;
      }
    }
    blocks = BlockSet::in_memory(std::move(noisy));
  }

  const PartialSVDd root = hierarchical_svd(blocks, plan, cfg.workers);
  row.report = compare(root, reference, std::min(d, root.factors.rank()), q, tail);
  switch (cfg.mode) {
    case ExperimentMode::FullRank:
      row.passed = row.report.e_sigma <= 1e-10 && row.report.max_angle() <= 1e-7 && row.report.bound_satisfied;
      break;
    case ExperimentMode::LowRank:
      row.passed = row.report.bound_satisfied;
      break;
    case ExperimentMode::Noise:
      row.passed = row.passed && row.report.bound_satisfied;
      break;
    case ExperimentMode::Cost:
      break;
  }
  return row;
}

}  // namespace

ExperimentResult cmd_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  if (!cfg.out_dir.empty()) ensure_dir(cfg.out_dir);

  if (cfg.mode == ExperimentMode::Cost) {
    if (!cfg.out_dir.empty()) {
      auto out = open_out(cfg.out_dir / "cost.csv");
      CostOptions grid;
      grid.published_grid = true;
      cmd_cost(grid, out);
    }
    return result;
  }

  std::ofstream summary;
  if (!cfg.out_dir.empty()) {
    summary = open_out(cfg.out_dir / "summary.csv");
    summary << experiment_csv_header() << '\n';
  }

  const std::vector<double> tails =
      cfg.mode == ExperimentMode::FullRank ? std::vector<double>{0.0} : cfg.tail_sq;
  for (const double tail_sq : tails) {
    for (const Eigen::Index d : cfg.effective_d()) {
      const VectorXd sigma = cfg.mode == ExperimentMode::FullRank ? linear_spectrum(cfg.rows)
                                                                  : spectrum_with_tail(cfg.rows, d, std::nullopt, tail_sq);
      const MatrixXd a = matrix_with_spectrum({cfg.rows, cfg.cols, sigma, cfg.seed});
      const SVDFactorsd reference = svd_reduced(a, std::nullopt, false);
      for (const auto& [n, q] : cfg.effective_grid()) {
        try {
          result.rows.push_back(run_cell(cfg, a, reference, tail_sq, n, q, d));
          if (summary.is_open()) {
            write_experiment_row(summary, result.rows.back());
            summary.flush();
          }
        } catch (const Error& e) {
          std::ostringstream msg;
          msg << "tail_sq=" << format_double(tail_sq) << " d=" << d << " n=" << n << " q=" << q << ": " << e.what();
          result.failures.push_back(msg.str());
        }
      }
    }
  }
  if (!result.failures.empty() && !cfg.out_dir.empty()) {
    auto out = open_out(cfg.out_dir / "failures.txt");
    for (const auto& f : result.failures) out << f << '\n';
  }
  return result;
}

}  // namespace hsvd
