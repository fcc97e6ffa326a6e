#include "r2vf/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "r2vf/error.hpp"
#include "r2vf/format.hpp"

namespace r2vf {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::r2vf: return "r2vf";
        case Method::olvf: return "olvf";
        case Method::none: return "none";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "r2vf") return Method::r2vf;
    if (text == "olvf") return Method::olvf;
    if (text == "none" || text == "no_regularization") return Method::none;
    throw InputError("unknown method '" + std::string(text) + "' (valid: r2vf, olvf, none)");
}

std::vector<Method> parse_methods(std::string_view text) {
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto item = text.substr(start, end - start);
        if (item.empty()) throw InputError("empty method name in '" + std::string(text) + "'");
        const auto m = parse_method(item);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
        start = end + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct Task {
    int rep;
    Dataset train;
    Dataset test;
    R2vfConfig config;
};

struct Cell {
    BenchRecord record;
    SplitAudit audit;
};

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
    std::sort(v.begin(), v.end());
    return v;
}

Cell run_cell(const Task& task, std::span<const FeatureSpec> specs, Method method, bool timing) {
    Cell cell;
    auto& rec = cell.record;
    rec.rep = task.rep;
    rec.method = method;
    rec.metric = task.config.family == Family::binomial ? MetricKind::log_loss : MetricKind::rmse;
    cell.audit.rep = task.rep;
    cell.audit.method = method;
    cell.audit.test_rows = sorted(task.test.row_ids);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        R2vfModel model;
        switch (method) {
            case Method::r2vf: {
                auto res = run_r2vf(task.train, specs, task.config);
                rec.chosen_lambda = res.fuse_report.chosen_lambda;
                auto rows = res.train_rows;
                rows.insert(rows.end(), res.valid_rows.begin(), res.valid_rows.end());
                cell.audit.fit_rows = sorted(std::move(rows));
                model = std::move(res.model);
                break;
            }
            case Method::olvf: {
                auto res = fit_olvf(task.train, specs, task.config);
                rec.chosen_lambda = res.report.chosen_lambda;
                model = std::move(res.model);
                cell.audit.fit_rows = sorted(task.train.row_ids);
                break;
            }
            case Method::none: {
                auto res = fit_unregularized(task.train, specs, task.config);
                model = std::move(res.model);
                cell.audit.fit_rows = sorted(task.train.row_ids);
                break;
            }
        }
        const auto pred = model.predict(task.test);
        rec.metric_value = metrics(pred, task.test.target, task.config.family).value;
        rec.covariate_count = model.covariate_count();
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
        rec.metric_value = std::numeric_limits<double>::quiet_NaN();
        rec.covariate_count = 0;
    }
    if (timing)
        rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                               .count();
    return cell;
}

template <typename MakeTask>
BenchResult run_all(int reps, std::span<const FeatureSpec> specs, const BenchOptions& options, MakeTask make_task) {
    if (options.methods.empty()) throw InputError("no methods to benchmark");
    if (options.workers < 1) throw InputError("workers must be >= 1");
    std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    std::mutex report_mutex;
    auto worker = [&] {
        for (int rep = next++; rep < reps; rep = next++) {
            const Task task = make_task(rep);
            auto& out = cells[static_cast<std::size_t>(rep)];
            for (auto method : options.methods) {
                out.push_back(run_cell(task, specs, method, options.timing));
                if (options.on_record) {
                    std::lock_guard<std::mutex> lock(report_mutex);
                    options.on_record(out.back().record);
                }
            }
        }
    };
    const int threads = std::min(options.workers, reps);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    BenchResult result;
    for (auto& rep_cells : cells)
        for (auto& c : rep_cells) {
            result.records.push_back(std::move(c.record));
            result.audits.push_back(std::move(c.audit));
        }
    // Already (rep, method) ordered; keep the contract explicit.
    std::vector<std::size_t> order(result.records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = result.records[a];
        const auto& y = result.records[b];
        return std::tie(x.rep, x.method) < std::tie(y.rep, y.method);
    });
    BenchResult out;
    for (auto i : order) {
        out.records.push_back(std::move(result.records[i]));
        out.audits.push_back(std::move(result.audits[i]));
    }
    return out;
}

void check_fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) throw InputError("test fraction must lie in (0, 1)");
}

bool binary_target(std::span<const double> y) {
    return !y.empty() && std::all_of(y.begin(), y.end(), [](double t) { return t == 0.0 || t == 1.0; });
}

}  // namespace

BenchResult run_synthetic_bench(int reps, const SynthConfig& synth, const R2vfConfig& config,
                                const BenchOptions& options) {
    if (reps < 1) throw InputError("reps must be >= 1");
    synth.validate();
    config.validate();
    check_fraction(options.test_fraction);
    R2vfConfig base = config;
    base.family = Family::gaussian;
    const auto specs = synthetic_specs(base);
    return run_all(reps, specs, options, [&](int rep) {
        SynthConfig sc = synth;
        sc.seed = synth.seed + static_cast<std::uint64_t>(rep);
        const auto data = generate(sc);
        const auto split = random_split(data.rows(), options.test_fraction, sc.seed);
        R2vfConfig cfg = base;
        cfg.seed = config.seed + static_cast<std::uint64_t>(rep);
        return Task{rep, data.subset(split.first), data.subset(split.second), cfg};
    });
}

BenchResult run_csv_bench(const Dataset& data, std::span<const FeatureSpec> specs, int splits,
                          const R2vfConfig& config, const BenchOptions& options) {
    if (splits < 2) throw InputError("splits must be >= 2");
    config.validate();
    data.validate();
    check_fraction(options.test_fraction);
    R2vfConfig base = config;
    base.family = binary_target(data.target) ? Family::binomial : Family::gaussian;
    return run_all(splits, specs, options, [&](int rep) {
        const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
        const auto split = random_split(data.rows(), options.test_fraction, seed);
        R2vfConfig cfg = base;
        cfg.seed = seed;
        return Task{rep, data.subset(split.first), data.subset(split.second), cfg};
    });
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

void write_raw_csv(const BenchResult& result, std::ostream& out) {
    out << "rep,method,metric_name,metric_value,covariate_count,wall_time_ms,chosen_lambda\n";
    for (const auto& r : result.records)
        out << r.rep << ',' << to_string(r.method) << ',' << to_string(r.metric) << ',' << format_double(r.metric_value)
            << ',' << r.covariate_count << ',' << r.wall_time_ms << ',' << format_double(r.chosen_lambda) << '\n';
}

namespace {

struct Stats {
    double mean, sd, min, q1, median, q3, max;
};

Stats describe(const std::vector<double>& v) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (v.empty()) return {nan, nan, nan, nan, nan, nan, nan};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : nan;
    return {mean, sd, quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0)};
}

void put(std::ostream& out, const Stats& s) {
    for (double x : {s.mean, s.sd, s.min, s.q1, s.median, s.q3, s.max}) out << ',' << format_double(x);
}

}  // namespace

void write_summary_csv(const BenchResult& result, std::ostream& out) {
    out << "method,metric_name,runs,failed";
    for (const char* prefix : {"metric", "covariates"})
        for (const char* stat : {"mean", "sd", "min", "q1", "median", "q3", "max"}) out << ',' << prefix << '_' << stat;
    out << '\n';
    std::vector<Method> methods;
    for (const auto& r : result.records)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    std::sort(methods.begin(), methods.end());
    for (auto m : methods) {
        std::vector<double> metric, covs;
        std::size_t runs = 0, failed = 0;
        MetricKind kind = MetricKind::rmse;
        for (const auto& r : result.records) {
            if (r.method != m) continue;
            ++runs;
            kind = r.metric;
            if (r.failed) {
                ++failed;
                continue;
            }
            metric.push_back(r.metric_value);
            covs.push_back(static_cast<double>(r.covariate_count));
        }
        out << to_string(m) << ',' << to_string(kind) << ',' << runs << ',' << failed;
        put(out, describe(metric));
        put(out, describe(covs));
        out << '\n';
    }
}

void emit_report(const BenchResult& result, const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir + "': " + ec.message());
    for (const auto& [name, writer] :
         {std::pair{"bench_raw.csv", &write_raw_csv}, std::pair{"bench_summary.csv", &write_summary_csv}}) {
        const auto path = (std::filesystem::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        writer(result, out);
        if (!out) throw std::runtime_error("failed writing '" + path + "'");
    }
}

}  // namespace r2vf
