#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "r2vf/data.hpp"
#include "r2vf/pipeline.hpp"

namespace r2vf {

enum class Method { r2vf, olvf, none };

std::string_view to_string(Method method);
/// Accepts r2vf, olvf and none (alias no_regularization).
Method parse_method(std::string_view text);
/// Comma-separated list; duplicates are ignored, order follows the enum.
std::vector<Method> parse_methods(std::string_view text);

struct BenchRecord {
    int rep = 0;
    Method method = Method::r2vf;
    MetricKind metric = MetricKind::rmse;
    double metric_value = 0.0;  // NaN when the cell failed
    std::size_t covariate_count = 0;
    std::int64_t wall_time_ms = 0;
    double chosen_lambda = 0.0;
    bool failed = false;
    std::string error;
};

/// Original row ids that reached a fit and those that were scored, per cell.
struct SplitAudit {
    int rep = 0;
    Method method = Method::r2vf;
    std::vector<std::size_t> fit_rows;
    std::vector<std::size_t> test_rows;
};

struct BenchResult {
    std::vector<BenchRecord> records;  // sorted by (rep, method)
    std::vector<SplitAudit> audits;    // same order
};

struct BenchOptions {
    std::vector<Method> methods{Method::r2vf, Method::olvf, Method::none};
    int workers = 1;
    bool timing = false;          // wall_time_ms stays 0 unless set
    double test_fraction = 0.5;
    std::function<void(const BenchRecord&)> on_record;  // serialized across workers
};

/// Each repetition draws a fresh table (seed = synth.seed + rep), holds out
/// test_fraction of it, fits every method on the rest and scores the holdout.
BenchResult run_synthetic_bench(int reps, const SynthConfig& synth, const R2vfConfig& config,
                                const BenchOptions& options = {});

/// `splits` seeded train/test partitions of one table. A 0/1 target is fitted
/// with the binomial family and scored by log-loss.
BenchResult run_csv_bench(const Dataset& data, std::span<const FeatureSpec> specs, int splits,
                          const R2vfConfig& config, const BenchOptions& options = {});

/// Type-7 quantile of unsorted values.
double quantile(std::vector<double> values, double p);

/// Writes `<dir>/bench_raw.csv` and `<dir>/bench_summary.csv`.
void emit_report(const BenchResult& result, const std::string& dir);
void write_raw_csv(const BenchResult& result, std::ostream& out);
void write_summary_csv(const BenchResult& result, std::ostream& out);

}  // namespace r2vf
