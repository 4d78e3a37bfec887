// lbvh: generate synthetic clouds, time tree construction and batched
// queries, sweep thread counts, and check results against brute force.
//
// Exit codes: 0 success, 1 usage error, 2 I/O error, 3 verification failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "lbvh/cloud_io.hpp"
#include "lbvh/datasets.hpp"
#include "lbvh/harness.hpp"

namespace {

using lbvh::harness::Allocation;
using lbvh::harness::BenchConfig;
using lbvh::harness::QueryKind;
using lbvh::harness::UsageError;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitMismatch = 3;

struct RawFlags {
  std::string source = "cube:filled";
  std::string target = "sphere:filled";
  std::size_t m = 10000;
  std::size_t n = 0;
  std::uint32_t k = 10;
  double radius = -1.0;
  std::string kind = "spatial";
  std::string alloc = "2p";
  std::size_t buffer_size = 0;
  std::string sort_queries = "on";
  std::vector<int> threads;
  std::uint64_t seed = 1;
  int reps = 5;
  std::string format = "csv";
  bool corrupt_tree = false;
};

void add_experiment_flags(CLI::App* cmd, RawFlags& f, bool thread_list) {
  cmd->add_option("--source", f.source, "source cloud shape:variant")->capture_default_str();
  cmd->add_option("--target", f.target, "target cloud shape:variant")->capture_default_str();
  cmd->add_option("--m", f.m, "number of source points")->capture_default_str();
  cmd->add_option("--n", f.n, "number of target points (default: m)");
  cmd->add_option("--k", f.k, "neighbors for knn; also sets the default radius")
      ->capture_default_str();
  cmd->add_option("--radius", f.radius, "spatial search radius (default: (6k/pi)^(1/3))");
  cmd->add_option("--kind", f.kind, "query kind")
      ->check(CLI::IsMember({"knn", "spatial"}))
      ->capture_default_str();
  cmd->add_option("--alloc", f.alloc, "result allocation strategy for spatial queries")
      ->check(CLI::IsMember({"1p", "2p"}))
      ->capture_default_str();
  cmd->add_option("--buffer-size", f.buffer_size, "per-query result slots for --alloc 1p");
  cmd->add_option("--sort-queries", f.sort_queries, "pre-sort queries by Morton code")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  if (thread_list) {
    cmd->add_option("--threads", f.threads, "comma-separated thread counts")
        ->delimiter(',')
        ->required();
  } else {
    cmd->add_option("--threads", f.threads, "OpenMP thread count (default: all)")
        ->expected(1);
  }
  cmd->add_option("--seed", f.seed, "RNG seed")->capture_default_str();
  cmd->add_option("--reps", f.reps, "timed repetitions (median reported)")->capture_default_str();
  cmd->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember({"csv", "pretty"}))
      ->capture_default_str();
}

BenchConfig to_config(const RawFlags& f) {
  BenchConfig c;
  try {
    const auto [ss, sv] = lbvh::datasets::parse_shape(f.source);
    const auto [ts, tv] = lbvh::datasets::parse_shape(f.target);
    c.source = {ss, sv};
    c.target = {ts, tv};
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  c.m = f.m;
  if (f.n > 0) c.n = f.n;
  c.k = f.k;
  if (f.radius >= 0.0) c.radius = f.radius;
  c.kind = f.kind == "knn" ? QueryKind::knn : QueryKind::spatial;
  c.alloc = f.alloc == "1p" ? Allocation::one_pass : Allocation::two_pass;
  if (f.buffer_size > 0) c.buffer_size = f.buffer_size;
  c.sort_queries = f.sort_queries == "on";
  c.threads = f.threads.empty() ? omp_get_max_threads() : f.threads.front();
  c.seed = f.seed;
  c.reps = f.reps;
  lbvh::harness::validate(c);
  return c;
}

int cmd_generate(const std::string& shape, std::size_t count, std::uint64_t seed,
                 const std::filesystem::path& output) {
  lbvh::datasets::CloudSpec spec;
  try {
    std::tie(spec.shape, spec.variant) = lbvh::datasets::parse_shape(shape);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (count < 1) throw UsageError("--m must be at least 1");
  spec.count = count;
  spec.seed = seed;
  lbvh::io::write_cloud(output, lbvh::datasets::generate(spec));
  return 0;
}

int cmd_bench(const RawFlags& f) {
  const auto report = lbvh::harness::run_bench(to_config(f));
  if (f.format == "pretty") {
    std::cout << lbvh::harness::pretty(report);
  } else {
    std::cout << lbvh::harness::csv_header() << '\n' << lbvh::harness::csv_row(report) << '\n';
  }
  return 0;
}

int cmd_scale(const RawFlags& f) {
  const auto rows = lbvh::harness::run_scale(to_config(f), f.threads);
  if (f.format == "pretty") {
    for (const auto& row : rows) {
      std::cout << lbvh::harness::pretty(row.report);
      std::printf("%-14s%.2f\n%-14s%.2f\n\n", "build speedup", row.build_speedup,
                  "query speedup", row.query_speedup);
    }
  } else {
    std::cout << lbvh::harness::scale_csv_header() << '\n';
    for (const auto& row : rows) std::cout << lbvh::harness::scale_csv_row(row) << '\n';
  }
  return 0;
}

int cmd_verify(const RawFlags& f) {
  const auto report = lbvh::harness::run_verify(to_config(f), f.corrupt_tree);
  std::cout << "queries: " << report.queries << '\n'
            << "mismatches: " << report.mismatches << '\n';
  if (report.mismatches == 0) {
    std::cout << "PASS\n";
    return 0;
  }
  for (const auto& diff : report.first_diffs) std::cout << "  " << diff << '\n';
  std::cout << "FAIL\n";
  return kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear BVH spatial search: cloud generation, benchmarks and verification"};
  app.require_subcommand(1);

  std::string gen_shape = "cube:filled";
  std::size_t gen_count = 1000;
  std::uint64_t gen_seed = 1;
  std::string gen_output;
  auto* generate = app.add_subcommand("generate", "write a synthetic point cloud (.csv or PCL3)");
  generate->add_option("--source,--shape", gen_shape, "cloud shape:variant")->capture_default_str();
  generate->add_option("--m,--count", gen_count, "number of points")->capture_default_str();
  generate->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  generate->add_option("-o,--output", gen_output, "output path; .csv for text, else PCL3")
      ->required();

  RawFlags bench_flags, scale_flags, verify_flags;
  auto* bench = app.add_subcommand("bench", "time build and one query batch, CSV to stdout");
  add_experiment_flags(bench, bench_flags, false);
  auto* scale = app.add_subcommand("scale", "run bench once per thread count");
  add_experiment_flags(scale, scale_flags, true);
  auto* verify = app.add_subcommand("verify", "compare tree results with brute force");
  add_experiment_flags(verify, verify_flags, false);
  verify->add_flag("--corrupt-tree", verify_flags.corrupt_tree,
                   "scramble leaves before querying (harness self-test)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen_shape, gen_count, gen_seed, gen_output);
    if (*bench) return cmd_bench(bench_flags);
    if (*scale) return cmd_scale(scale_flags);
    if (*verify) return cmd_verify(verify_flags);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lbvh::io::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
