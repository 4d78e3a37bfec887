#include "lbvh/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include <omp.h>

#include "lbvh/bvh.hpp"
#include "lbvh/oracle.hpp"
#include "lbvh/traversal.hpp"

namespace lbvh::harness {

namespace {

constexpr std::size_t kMaxDiffs = 5;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Restores the OpenMP thread count on scope exit.
class ThreadScope {
 public:
  explicit ThreadScope(int threads) : previous_(omp_get_max_threads()) {
    omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(previous_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int previous_;
};

struct Workload {
  std::vector<Point> source;
  std::vector<Point> target;
  std::vector<Box> boxes;
};

Workload make_workload(const BenchConfig& config) {
  Workload w;
  w.source = datasets::generate(
      {config.source.shape, config.source.variant, config.m, config.seed});
  w.target = datasets::generate(
      {config.target.shape, config.target.variant, config.target_count(), config.target_seed()});
  w.boxes = datasets::to_boxes(w.source);
  return w;
}

struct BatchOutcome {
  ResultSet results;
  bool fallback = false;
};

BatchOutcome run_batch(const BenchConfig& config, const Bvh& tree,
                       const std::vector<Point>& target) {
  const QueryOptions options{config.sort_queries, Execution::parallel};
  if (config.kind == QueryKind::knn) {
    std::vector<KnnQuery> queries(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) queries[i] = {target[i], config.k};
    return {query_knn(tree, queries, options), false};
  }
  const auto radius = static_cast<float>(config.effective_radius());
  std::vector<SpatialQuery> queries(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) queries[i] = {target[i], radius};
  if (config.alloc == Allocation::one_pass) {
    BufferedResult r = query_spatial_1p(tree, queries, *config.buffer_size, options);
    return {std::move(r.results), r.fell_back};
  }
  return {query_spatial_2p(tree, queries, options), false};
}

CountStats count_stats(const ResultSet& rs) {
  CountStats stats;
  const std::size_t q = rs.query_count();
  if (q == 0) return stats;
  stats.min = rs.count(0);
  for (std::size_t i = 0; i < q; ++i) {
    stats.min = std::min(stats.min, rs.count(i));
    stats.max = std::max(stats.max, rs.count(i));
  }
  stats.mean = static_cast<double>(rs.indices.size()) / static_cast<double>(q);
  return stats;
}

const char* kind_name(QueryKind kind) { return kind == QueryKind::knn ? "knn" : "spatial"; }

std::string alloc_name(const BenchConfig& c) {
  if (c.kind == QueryKind::knn) return "-";
  return c.alloc == Allocation::one_pass ? "1p" : "2p";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

double BenchConfig::effective_radius() const {
  return radius.value_or(datasets::default_radius(k));
}

std::uint64_t BenchConfig::target_seed() const {
  // Source and target must be independent clouds even when shapes match.
  return seed ^ 0x9e3779b97f4a7c15ull;
}

void validate(const BenchConfig& c) {
  if (c.m < 1) throw UsageError("--m must be at least 1");
  if (c.n && *c.n < 1) throw UsageError("--n must be at least 1");
  if (c.k < 1) throw UsageError("--k must be at least 1");
  if (c.radius && !(*c.radius >= 0.0)) throw UsageError("--radius must be non-negative");
  if (c.reps < 1) throw UsageError("--reps must be at least 1");
  if (c.threads < 1) throw UsageError("--threads must be at least 1");
  if (c.kind == QueryKind::knn) {
    if (c.alloc == Allocation::one_pass || c.buffer_size)
      throw UsageError("--alloc 1p and --buffer-size apply to spatial queries only");
    if (c.radius) throw UsageError("--radius applies to spatial queries only");
    return;
  }
  if (c.alloc == Allocation::one_pass && !c.buffer_size)
    throw UsageError("--alloc 1p requires --buffer-size");
  if (c.alloc == Allocation::two_pass && c.buffer_size)
    throw UsageError("--buffer-size is only valid with --alloc 1p");
  if (c.buffer_size && *c.buffer_size < 1) throw UsageError("--buffer-size must be at least 1");
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("median of no samples");
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 == 1 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

BenchReport run_bench(const BenchConfig& config) {
  validate(config);
  ThreadScope threads(config.threads);

  BenchReport report;
  report.config = config;

  const auto gen_start = Clock::now();
  const Workload w = make_workload(config);
  report.generate_ms = elapsed_ms(gen_start);

  std::vector<double> build_samples, query_samples;
  BatchOutcome outcome;
  // Repetition 0 is a discarded warm-up.
  for (int rep = 0; rep <= config.reps; ++rep) {
    const auto build_start = Clock::now();
    const Bvh tree(w.boxes);
    const double build_ms = elapsed_ms(build_start);

    const auto query_start = Clock::now();
    outcome = run_batch(config, tree, w.target);
    const double query_ms = elapsed_ms(query_start);

    if (rep > 0) {
      build_samples.push_back(build_ms);
      query_samples.push_back(query_ms);
    }
  }

  report.build_ms = median(build_samples);
  report.query_ms = median(query_samples);
  report.rate_qps = static_cast<double>(config.target_count()) / (report.query_ms / 1000.0);
  report.counts = count_stats(outcome.results);
  report.fallback = outcome.fallback;
  return report;
}

std::string csv_header() {
  return "m,n,kind,alloc,sort,threads,seed,build_ms,query_ms,rate_qps,min_cnt,mean_cnt,max_cnt,"
         "fallback";
}

std::string csv_row(const BenchReport& r) {
  const BenchConfig& c = r.config;
  std::ostringstream out;
  out << c.m << ',' << c.target_count() << ',' << kind_name(c.kind) << ',' << alloc_name(c) << ','
      << (c.sort_queries ? "on" : "off") << ',' << c.threads << ',' << c.seed << ','
      << fixed(r.build_ms, 3) << ',' << fixed(r.query_ms, 3) << ',' << fixed(r.rate_qps, 1) << ','
      << r.counts.min << ',' << fixed(r.counts.mean, 4) << ',' << r.counts.max << ','
      << (r.fallback ? 1 : 0);
  return out.str();
}

std::string pretty(const BenchReport& r) {
  const BenchConfig& c = r.config;
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%-14s", key);
    out << buf << value << '\n';
  };
  line("source", datasets::to_string(c.source.shape, c.source.variant) + " m=" + std::to_string(c.m));
  line("target", datasets::to_string(c.target.shape, c.target.variant) +
                     " n=" + std::to_string(c.target_count()));
  std::string kind = kind_name(c.kind);
  kind += c.kind == QueryKind::knn ? " k=" + std::to_string(c.k)
                                   : " r=" + fixed(c.effective_radius(), 4) + " alloc=" +
                                         alloc_name(c);
  line("query", kind);
  line("sort queries", c.sort_queries ? "on" : "off");
  line("threads", std::to_string(c.threads));
  line("seed", std::to_string(c.seed));
  line("reps", std::to_string(c.reps) + " (median, after 1 warm-up)");
  line("generate", fixed(r.generate_ms, 3) + " ms");
  line("build", fixed(r.build_ms, 3) + " ms");
  line("query", fixed(r.query_ms, 3) + " ms");
  line("rate", fixed(r.rate_qps, 1) + " queries/s");
  line("results", "min " + std::to_string(r.counts.min) + ", mean " + fixed(r.counts.mean, 4) +
                      ", max " + std::to_string(r.counts.max));
  if (c.kind == QueryKind::spatial && c.alloc == Allocation::one_pass) {
    line("fallback", r.fallback ? "yes" : "no");
  }
  return out.str();
}

std::vector<ScaleRow> run_scale(const BenchConfig& base, std::span<const int> threads) {
  if (threads.empty()) throw UsageError("--threads needs at least one value");
  for (const int t : threads) {
    if (t < 1) throw UsageError("--threads values must be positive");
  }

  std::vector<ScaleRow> rows;
  for (const int t : threads) {
    BenchConfig config = base;
    config.threads = t;
    rows.push_back({run_bench(config), 1.0, 1.0});
  }

  const auto reference = std::find_if(rows.begin(), rows.end(),
                                      [](const ScaleRow& r) { return r.report.config.threads == 1; });
  const BenchReport& ref = reference != rows.end() ? reference->report : rows.front().report;
  for (ScaleRow& row : rows) {
    row.build_speedup = ref.build_ms / row.report.build_ms;
    row.query_speedup = ref.query_ms / row.report.query_ms;
  }
  return rows;
}

std::string scale_csv_header() { return csv_header() + ",build_speedup,query_speedup"; }

std::string scale_csv_row(const ScaleRow& row) {
  return csv_row(row.report) + ',' + fixed(row.build_speedup, 2) + ',' +
         fixed(row.query_speedup, 2);
}

VerifyReport run_verify(const BenchConfig& config, bool corrupt_tree) {
  validate(config);
  if (config.m > kVerifyMaxPoints || config.target_count() > kVerifyMaxPoints) {
    throw UsageError("verify is limited to m, n <= " + std::to_string(kVerifyMaxPoints));
  }
  ThreadScope threads(config.threads);

  const Workload w = make_workload(config);
  Bvh tree(w.boxes);
  if (corrupt_tree) {
    auto& nodes = BvhTestAccess::nodes(tree);
    const std::size_t first_leaf = tree.size() - 1;
    for (std::size_t i = first_leaf, j = nodes.size() - 1; i < j; ++i, --j) {
      std::swap(nodes[i].left, nodes[j].left);
    }
  }

  const BatchOutcome outcome = run_batch(config, tree, w.target);
  const ResultSet& rs = outcome.results;

  VerifyReport report;
  report.queries = w.target.size();
  auto record = [&](std::size_t q, const std::string& diff) {
    ++report.mismatches;
    if (report.first_diffs.size() < kMaxDiffs) {
      report.first_diffs.push_back("query " + std::to_string(q) + ": " + diff);
    }
  };

  if (!is_well_formed(rs) || rs.query_count() != w.target.size()) {
    record(0, "malformed result set");
    return report;
  }

  const auto radius = static_cast<float>(config.effective_radius());
  for (std::size_t q = 0; q < w.target.size(); ++q) {
    std::optional<std::string> diff;
    if (config.kind == QueryKind::knn) {
      const KnnQuery query{w.target[q], config.k};
      diff = oracle::compare_knn(w.source, query.center, rs.results(q), rs.result_distances(q),
                                 oracle::brute_knn(w.source, query));
    } else {
      diff = oracle::compare_radius(rs.results(q),
                                    oracle::brute_radius(w.source, {w.target[q], radius}));
    }
    if (diff) record(q, *diff);
  }
  return report;
}

}  // namespace lbvh::harness
