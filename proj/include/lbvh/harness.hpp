#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbvh/datasets.hpp"

namespace lbvh::harness {

// Experiment driver behind the `lbvh` command line tool: generates a source
// and a target cloud, builds a tree over the source, runs one batch of
// queries from the target and reports median timings and result counts.

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class QueryKind { knn, spatial };
enum class Allocation { one_pass, two_pass };

struct CloudChoice {
  datasets::Shape shape = datasets::Shape::cube;
  datasets::Variant variant = datasets::Variant::filled;
};

struct BenchConfig {
  CloudChoice source{datasets::Shape::cube, datasets::Variant::filled};
  CloudChoice target{datasets::Shape::sphere, datasets::Variant::filled};
  std::size_t m = 10000;
  std::optional<std::size_t> n;  // defaults to m
  std::uint32_t k = 10;
  std::optional<double> radius;  // defaults to datasets::default_radius(k)
  QueryKind kind = QueryKind::spatial;
  Allocation alloc = Allocation::two_pass;
  std::optional<std::size_t> buffer_size;  // required iff alloc == one_pass
  bool sort_queries = true;
  int threads = 1;
  std::uint64_t seed = 1;
  int reps = 5;

  std::size_t target_count() const { return n.value_or(m); }
  double effective_radius() const;
  std::uint64_t target_seed() const;
};

/// Throws UsageError for out-of-range values and inconsistent flags.
void validate(const BenchConfig& config);

double median(std::vector<double> samples);

struct CountStats {
  std::size_t min = 0;
  double mean = 0.0;
  std::size_t max = 0;
};

struct BenchReport {
  BenchConfig config;
  double generate_ms = 0.0;
  double build_ms = 0.0;  // medians over config.reps runs
  double query_ms = 0.0;
  double rate_qps = 0.0;
  CountStats counts;
  bool fallback = false;
};

BenchReport run_bench(const BenchConfig& config);

std::string csv_header();
std::string csv_row(const BenchReport& report);
std::string pretty(const BenchReport& report);

struct ScaleRow {
  BenchReport report;
  double build_speedup = 1.0;
  double query_speedup = 1.0;
};

/// One run_bench per thread count with identical seeds. Speedups are
/// relative to the single-thread row, or to the first row when the list
/// does not contain 1.
std::vector<ScaleRow> run_scale(const BenchConfig& base, std::span<const int> threads);

std::string scale_csv_header();
std::string scale_csv_row(const ScaleRow& row);

inline constexpr std::size_t kVerifyMaxPoints = 100000;

struct VerifyReport {
  std::size_t queries = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> first_diffs;  // at most a handful
};

/// Runs the configured batch through the tree and the brute-force oracle.
/// `corrupt_tree` scrambles leaf ordinals after construction so the harness
/// can be shown to catch a broken tree.
VerifyReport run_verify(const BenchConfig& config, bool corrupt_tree = false);

}  // namespace lbvh::harness
