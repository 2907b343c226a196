// hsvd: generate wide test matrices, run the hierarchical SVD, compare with a
// direct SVD, and print cost-model tables.

#include <hsvd/csv.hpp>
#include <hsvd/harness.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace hsvd;

std::vector<Eigen::Index> to_index_list(const std::string& text) {
  std::vector<Eigen::Index> out;
  for (auto v : parse_int_list(text)) out.push_back(static_cast<Eigen::Index>(v));
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Hierarchical SVD of wide matrices"};
  app.require_subcommand(1);
  int status = kExitOk;

  // gen
  GenOptions gen;
  std::string gen_config, gen_widths;
  long long gen_rank = 0;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a matrix with a known spectrum as HSVDBLK1 blocks");
  gen_cmd->add_option("--config", gen_config, "key=value file (rows, cols, blocks, widths, seed, rank, tail_sq)");
  gen_cmd->add_option("--rows,-D", gen.rows, "D");
  gen_cmd->add_option("--cols,-N", gen.cols, "N");
  gen_cmd->add_option("--blocks,-M", gen.blocks, "block count");
  gen_cmd->add_option("--widths", gen_widths, "comma-separated block widths");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--rank", gen_rank, "head length d (omit for a full-rank spectrum)");
  gen_cmd->add_option("--tail-sq", gen.tail_sq, "squared Frobenius tail beyond --rank");
  gen_cmd->add_option("--out,-o", gen.out_dir, "output directory")->required();
  gen_cmd->callback([&] {
    if (!gen_config.empty()) {
      const auto cfg = KeyValueConfig::load(gen_config);
      cfg.require_known({"rows", "cols", "blocks", "widths", "seed", "rank", "tail_sq"});
      auto set_if = [&](const char* key, const char* flag, auto& field) {
        if (auto v = cfg.get_int(key); v && gen_cmd->count(flag) == 0) field = static_cast<std::decay_t<decltype(field)>>(*v);
      };
      set_if("rows", "--rows", gen.rows);
      set_if("cols", "--cols", gen.cols);
      set_if("blocks", "--blocks", gen.blocks);
      set_if("seed", "--seed", gen.seed);
      set_if("rank", "--rank", gen_rank);
      if (auto v = cfg.get_double("tail_sq"); v && gen_cmd->count("--tail-sq") == 0) gen.tail_sq = *v;
      if (auto v = cfg.get("widths"); v && gen_cmd->count("--widths") == 0) gen_widths = *v;
    }
    if (gen_rank > 0) gen.rank = gen_rank;
    gen.widths = to_index_list(gen_widths);
    if (!gen.widths.empty() && gen_cmd->count("--blocks") == 0 && gen_config.empty())
      gen.blocks = static_cast<Eigen::Index>(gen.widths.size());
    std::cout << cmd_gen(gen).string() << '\n';
  });

  // partition
  std::string part_input, part_widths, part_out;
  Eigen::Index part_blocks = 1;
  auto* part_cmd = app.add_subcommand("partition", "Split an HSVDBLK1 matrix into column blocks");
  part_cmd->add_option("--input,-i", part_input, "HSVDBLK1 matrix file")->required();
  part_cmd->add_option("--blocks,-M", part_blocks, "block count")->required();
  part_cmd->add_option("--widths", part_widths, "comma-separated block widths");
  part_cmd->add_option("--out,-o", part_out, "output directory")->required();
  part_cmd->callback(
      [&] { std::cout << cmd_partition(part_input, part_blocks, to_index_list(part_widths), part_out).string() << '\n'; });

  // run
  RunOptions run;
  run.workers = default_workers();
  int run_q = -1;
  long long run_d = 0;
  auto* run_cmd = app.add_subcommand("run", "Hierarchical SVD of the blocks listed in a manifest");
  run_cmd->add_option("--manifest,-m", run.manifest, "manifest.txt")->required();
  run_cmd->add_option("-n", run.n, "children per merge");
  run_cmd->add_option("-q", run_q, "merge levels (default: ceil(log_n M))");
  run_cmd->add_option("-d", run_d, "target rank (default: D)");
  run_cmd->add_option("--workers,-w", run.workers, "worker threads (default: $HSVD_WORKERS or 1)");
  run_cmd->add_flag("--right-vectors", run.right_vectors, "also recover V' into v.bin");
  run_cmd->add_option("--out,-o", run.out_dir, "output directory")->required();
  run_cmd->callback([&] {
    if (run_q >= 0) run.q = run_q;
    if (run_d > 0) run.d = run_d;
    if (run.workers < 1) throw Error(ErrorKind::BadConfig, "workers must be >= 1");
    const auto root = cmd_run(run);
    std::cout << "rank " << root.factors.rank() << ", sigma_1 = " << format_double(root.factors.sigma(0)) << '\n';
  });

  // compare
  CompareOptions cmp;
  long long cmp_k = 0;
  std::string cmp_out;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare a run with a reference and evaluate the error bound");
  cmp_cmd->add_option("--result,-r", cmp.result_dir, "run output directory")->required();
  cmp_cmd->add_option("--reference", cmp.reference, "manifest or another run directory")->required();
  cmp_cmd->add_option("-k", cmp_k, "leading triplets to compare");
  cmp_cmd->add_flag("--check-bound", cmp.check_bound, "exit 3 if the q-level error bound fails");
  cmp_cmd->add_option("--out,-o", cmp_out, "CSV file (default: stdout)");
  cmp_cmd->callback([&] {
    if (cmp_k > 0) cmp.k = cmp_k;
    std::ofstream file;
    if (!cmp_out.empty()) {
      file.open(cmp_out, std::ios::trunc);
      if (!file) throw Error(ErrorKind::Io, "cannot write '" + cmp_out + "'");
    }
    const auto outcome = cmd_compare(cmp, cmp_out.empty() ? std::cout : file);
    if (outcome.bound_checked && !outcome.report.bound_satisfied) status = kExitBound;
  });

  // cost
  CostOptions cost;
  std::string cost_m = "1,2,4,8,16", cost_out;
  bool cost_lenient = false, cost_strong = false;
  auto* cost_cmd = app.add_subcommand("cost", "Alpha-beta-gamma speedup and efficiency table");
  cost_cmd->add_option("--alpha", cost.params.alpha, "latency per message [s]");
  cost_cmd->add_option("--beta", cost.params.beta, "time per word [s]");
  cost_cmd->add_option("--gamma", cost.params.gamma, "time per flop [s]");
  cost_cmd->add_option("--rows,-D", cost.params.d_rows, "D");
  cost_cmd->add_option("--cols,-N", cost.params.n_cols, "columns per core (weak scaling) or N (--strong)");
  cost_cmd->add_option("-d", cost.params.d, "target rank");
  cost_cmd->add_option("-n", cost.params.n, "children per merge");
  cost_cmd->add_option("--m-list", cost_m, "comma-separated core counts");
  cost_cmd->add_flag("--lenient", cost_lenient, "allow m that is not a power of n");
  cost_cmd->add_flag("--strong", cost_strong, "treat --cols as the fixed total N");
  cost_cmd->add_flag("--paper-grid", cost.published_grid, "emit the published weak-scaling grids");
  cost_cmd->add_option("--out,-o", cost_out, "CSV file (default: stdout)");
  cost_cmd->callback([&] {
    cost.m_values.clear();
    for (auto v : parse_int_list(cost_m)) cost.m_values.push_back(v);
    cost.table.strict = !cost_lenient;
    cost.table.weak_scaling = !cost_strong;
    cost.params.override_m = true;
    if (cost_out.empty()) {
      cmd_cost(cost, std::cout);
    } else {
      std::ofstream file(cost_out, std::ios::trunc);
      if (!file) throw Error(ErrorKind::Io, "cannot write '" + cost_out + "'");
      cmd_cost(cost, file);
    }
  });

  // experiment
  std::string exp_config, exp_mode, exp_out, exp_grid, exp_tails, exp_d;
  long long exp_rows = 0, exp_cols = 0, exp_seed = -1, exp_workers = 0;
  bool exp_large = false;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a scenario grid and write summary.csv");
  exp_cmd->add_option("--config", exp_config, "key=value file");
  exp_cmd->add_option("--mode", exp_mode, "fullrank | lowrank | noise | cost");
  exp_cmd->add_option("--rows,-D", exp_rows, "D");
  exp_cmd->add_option("--cols,-N", exp_cols, "N");
  exp_cmd->add_option("--seed", exp_seed, "generator seed");
  exp_cmd->add_option("--grid", exp_grid, "cells n:q,n:q,...");
  exp_cmd->add_option("--tail-sq", exp_tails, "comma-separated squared tails");
  exp_cmd->add_option("-d", exp_d, "comma-separated target ranks");
  exp_cmd->add_option("--workers,-w", exp_workers, "worker threads");
  exp_cmd->add_flag("--large", exp_large, "allow full-size shapes (defaults to 400 x 128000)");
  exp_cmd->add_option("--out,-o", exp_out, "output directory")->required();
  exp_cmd->callback([&] {
    KeyValueConfig cfg = exp_config.empty() ? KeyValueConfig{} : KeyValueConfig::load(exp_config);
    if (!exp_mode.empty()) cfg.set("mode", exp_mode);
    if (exp_rows > 0) cfg.set("rows", std::to_string(exp_rows));
    if (exp_cols > 0) cfg.set("cols", std::to_string(exp_cols));
    if (exp_seed >= 0) cfg.set("seed", std::to_string(exp_seed));
    if (!exp_grid.empty()) cfg.set("grid", exp_grid);
    if (!exp_tails.empty()) cfg.set("tail_sq", exp_tails);
    if (!exp_d.empty()) cfg.set("d", exp_d);
    if (exp_workers > 0) cfg.set("workers", std::to_string(exp_workers));
    else if (!cfg.has("workers")) cfg.set("workers", std::to_string(default_workers()));
    if (exp_large) cfg.set("large", "true");
    cfg.set("out", exp_out);
    const auto result = cmd_experiment(ExperimentConfig::from_config(cfg));
    for (const auto& f : result.failures) std::cerr << "failed cell: " << f << '\n';
    if (!result.failures.empty()) status = kExitValidation;
    else if (!result.all_passed()) status = kExitBound;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const hsvd::Error& e) {
    std::cerr << "hsvd: " << e.what() << '\n';
    return hsvd::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "hsvd: " << e.what() << '\n';
    return hsvd::kExitIo;
  }
}
