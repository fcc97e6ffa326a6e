#include "r2vf/cli.hpp"

#include <algorithm>
#include <climits>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "r2vf/benchmark.hpp"
#include "r2vf/data.hpp"
#include "r2vf/error.hpp"
#include "r2vf/format.hpp"
#include "r2vf/manifest.hpp"
#include "r2vf/pipeline.hpp"
#include "r2vf/serialize.hpp"

namespace r2vf {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    bool quiet = false;
};

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

std::string manifest_path_for(const std::string& file) { return file + ".manifest.json"; }

std::string join_path(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
}

void ensure_parent(const std::string& file) {
    const auto parent = fs::path(file).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
}

void write_manifest(RunManifest m, const std::string& path) {
    for (const auto& [role, p] : m.inputs) m.checksums[p] = sha256_file(p);
    for (const auto& [role, p] : m.outputs) m.checksums[p] = sha256_file(p);
    write_text_file(path, dump(to_json(m)));
}

// ---------------------------------------------------------------- config flags

struct ConfigFlags {
    std::string config_path;
    std::string family;
    int n = 0;
    int m = 0;
    std::string ranking;
    std::string refit;
    double validation_fraction = 0;
    int grid_size = 0;
    double grid_ratio = 0;
    int min_obs = 0;
    std::uint64_t seed = 0;
    std::string reference;
    std::vector<std::pair<CLI::Option*, std::function<void(R2vfConfig&)>>> overrides;

    void add(CLI::App* app, bool with_family) {
        const R2vfConfig d;
        family = std::string(to_string(d.family));
        n = d.n;
        m = d.m;
        ranking = std::string(to_string(d.ranking_penalty));
        refit = d.refit ? "on" : "off";
        validation_fraction = d.validation_fraction;
        grid_size = d.grid_size;
        grid_ratio = d.grid_ratio;
        min_obs = d.min_obs_per_bin;
        seed = d.seed;
        reference = std::string(to_string(d.nominal_reference));

        const CLI::Validator open_unit(
            [](std::string& s) -> std::string {
                const auto v = parse_double(s);
                return v && *v > 0.0 && *v < 1.0 ? "" : "must lie strictly between 0 and 1";
            },
            "(0,1)");
        app->add_option("--config", config_path, "JSON config file; explicit flags override it");
        if (with_family)
            track(app->add_option("--family", family, "gaussian or binomial")
                      ->check(CLI::IsMember({"gaussian", "binomial"}))
                      ->capture_default_str(),
                  [this](R2vfConfig& c) { c.family = parse_family(family); });
        track(app->add_option("--n", n, "max bins for numeric/ordinal features")
                  ->check(CLI::Range(2, INT_MAX))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.n = n; });
        track(app->add_option("--m", m, "max bins for ranked nominal features")
                  ->check(CLI::Range(2, INT_MAX))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.m = m; });
        track(app->add_option("--ranking", ranking, "penalty of the ranking fit")
                  ->check(CLI::IsMember({"lasso", "ridge"}))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.ranking_penalty = parse_ranking_penalty(ranking); });
        track(app->add_option("--refit", refit, "unpenalized refit on the clusters")
                  ->check(CLI::IsMember({"on", "off"}))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.refit = refit == "on"; });
        track(app->add_option("--validation-fraction", validation_fraction, "share of training rows held out")
                  ->check(open_unit)
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.validation_fraction = validation_fraction; });
        track(app->add_option("--grid-size", grid_size, "lambda values per search")
                  ->check(CLI::Range(2, INT_MAX))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.grid_size = grid_size; });
        track(app->add_option("--grid-ratio", grid_ratio, "smallest/largest lambda")
                  ->check(open_unit)
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.grid_ratio = grid_ratio; });
        track(app->add_option("--min-obs", min_obs, "minimum observations per bin")
                  ->check(CLI::PositiveNumber)
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.min_obs_per_bin = min_obs; });
        track(app->add_option("--seed", seed, "random seed")->capture_default_str(),
              [this](R2vfConfig& c) { c.seed = seed; });
        track(app->add_option("--reference", reference, "nominal reference level policy")
                  ->check(CLI::IsMember({"most_frequent", "target_mean"}))
                  ->capture_default_str(),
              [this](R2vfConfig& c) { c.nominal_reference = parse_reference_policy(reference); });
    }

    void track(CLI::Option* opt, std::function<void(R2vfConfig&)> apply) {
        overrides.emplace_back(opt, std::move(apply));
    }

    R2vfConfig resolve() const {
        R2vfConfig c = config_path.empty() ? R2vfConfig{} : config_from_json(read_json_file(config_path));
        for (const auto& [opt, apply] : overrides)
            if (opt->count() > 0) apply(c);
        c.validate();
        return c;
    }
};

std::vector<std::string> config_args(const R2vfConfig& c, bool with_family) {
    std::vector<std::string> a;
    if (with_family) a.insert(a.end(), {"--family", std::string(to_string(c.family))});
    a.insert(a.end(), {"--n", num(c.n), "--m", num(c.m), "--ranking", std::string(to_string(c.ranking_penalty)),
                       "--refit", c.refit ? "on" : "off", "--validation-fraction", num(c.validation_fraction),
                       "--grid-size", num(c.grid_size), "--grid-ratio", num(c.grid_ratio), "--min-obs",
                       num(c.min_obs_per_bin), "--seed", num(c.seed), "--reference",
                       std::string(to_string(c.nominal_reference))});
    return a;
}

std::vector<FeatureSpec> load_specs(const std::string& path, const R2vfConfig& config) {
    return specs_from_json(read_json_file(path), config);
}

// ---------------------------------------------------------------- simulate

struct SimulateJob {
    SynthConfig synth;
    std::string out;

    Json settings() const {
        return {{"rows", synth.n_rows},
                {"professions", synth.n_professions},
                {"noise_sd", synth.noise_sd},
                {"seed", synth.seed},
                {"out", out}};
    }
    static SimulateJob from(const Json& s) {
        SimulateJob j;
        j.synth.n_rows = s.at("rows").get<std::size_t>();
        j.synth.n_professions = s.at("professions").get<int>();
        j.synth.noise_sd = s.at("noise_sd").get<double>();
        j.synth.seed = s.at("seed").get<std::uint64_t>();
        j.out = s.at("out").get<std::string>();
        return j;
    }
    std::vector<std::string> args() const {
        return {"simulate", "--rows", std::to_string(synth.n_rows), "--professions", num(synth.n_professions),
                "--noise-sd", num(synth.noise_sd), "--seed", num(synth.seed), "--out", out};
    }
};

RunManifest execute(const SimulateJob& job, Context& ctx) {
    job.synth.validate();
    const auto data = generate(job.synth);
    ensure_parent(job.out);
    std::ostringstream text;
    write_csv(data, text);
    write_text_file(job.out, text.str());

    RunManifest m;
    m.subcommand = "simulate";
    m.args = job.args();
    m.settings = job.settings();
    m.seed = job.synth.seed;
    m.outputs["data"] = job.out;
    write_manifest(m, manifest_path_for(job.out));
    if (!ctx.quiet) ctx.out << Json{{"rows", data.rows()}, {"out", job.out}}.dump() << '\n';
    return m;
}

// ---------------------------------------------------------------- fit

struct FitJob {
    std::string data, spec, target, out_dir;
    R2vfConfig config;

    Json settings() const { return {{"data", data}, {"spec", spec}, {"target", target}, {"out_dir", out_dir}}; }
    static FitJob from(const Json& s, const Json& config) {
        return {s.at("data").get<std::string>(), s.at("spec").get<std::string>(), s.at("target").get<std::string>(),
                s.at("out_dir").get<std::string>(), config_from_json(config)};
    }
    std::vector<std::string> args() const {
        std::vector<std::string> a = {"fit", "--data", data, "--spec", spec, "--target", target};
        const auto c = config_args(config, true);
        a.insert(a.end(), c.begin(), c.end());
        a.insert(a.end(), {"--out-dir", out_dir});
        return a;
    }
};

Json fit_report(const R2vfResult& res) {
    Json schemes = Json::object();
    for (const auto& [feature, scheme] : res.ordinal_schemes) schemes[feature] = to_json(scheme);
    return {{"rank", to_json(res.rank_report)},
            {"fuse", to_json(res.fuse_report)},
            {"ranking", to_json(res.ranking)},
            {"ordinal_schemes", std::move(schemes)},
            {"dropped", res.dropped},
            {"warnings", res.warnings},
            {"refit_applied", res.refit_applied},
            {"covariate_count", res.model.covariate_count()},
            {"train_rows", res.train_rows.size()},
            {"valid_rows", res.valid_rows.size()}};
}

RunManifest execute(const FitJob& job, Context& ctx) {
    const auto specs = load_specs(job.spec, job.config);
    const auto data = load_csv(job.data, specs, TargetSpec::parse(job.target));
    const auto res = run_r2vf(data, specs, job.config);
    for (const auto& w : res.warnings) ctx.err << "warning: " << w << '\n';

    ensure_dir(job.out_dir);
    RunManifest m;
    m.subcommand = "fit";
    m.args = job.args();
    m.settings = job.settings();
    m.config = to_json(job.config);
    m.seed = job.config.seed;
    m.inputs = {{"data", job.data}, {"spec", job.spec}};
    m.outputs = {{"model", join_path(job.out_dir, "model.json")},
                 {"clusters", join_path(job.out_dir, "clusters.json")},
                 {"report", join_path(job.out_dir, "report.json")}};
    write_text_file(m.outputs["model"], dump(to_json(res.model)));
    write_text_file(m.outputs["clusters"], dump(to_json(res.clusters)));
    write_text_file(m.outputs["report"], dump(fit_report(res)));
    write_manifest(m, join_path(job.out_dir, "manifest.json"));

    if (!ctx.quiet) {
        Json clusters = Json::object();
        for (const auto& f : res.clusters.features) clusters[f.feature] = f.cluster_count();
        ctx.out << Json{{"covariates", res.model.covariate_count()},
                        {"clusters", std::move(clusters)},
                        {"refit", res.refit_applied},
                        {"chosen_lambda", res.fuse_report.chosen_lambda}}
                       .dump()
                << '\n';
    }
    return m;
}

// ---------------------------------------------------------------- predict

struct PredictJob {
    std::string model, data, out;

    Json settings() const { return {{"model", model}, {"data", data}, {"out", out}}; }
    static PredictJob from(const Json& s) {
        return {s.at("model").get<std::string>(), s.at("data").get<std::string>(), s.at("out").get<std::string>()};
    }
    std::vector<std::string> args() const { return {"predict", "--model", model, "--data", data, "--out", out}; }
};

RunManifest execute(const PredictJob& job, Context& ctx) {
    const auto model = model_from_json(read_json_file(job.model));
    std::ifstream in(job.data, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + job.data + "'");
    const bool empty_file = in.peek() == std::char_traits<char>::eof();
    const auto data = read_csv(in, model.specs, std::nullopt);

    std::ostringstream text;
    std::size_t unseen = 0;
    if (!empty_file) {
        text << "prediction\n";
        if (data.rows() > 0)
            for (double p : model.predict(data, &unseen)) text << format_double(p) << '\n';
    }
    ensure_parent(job.out);
    write_text_file(job.out, text.str());
    if (unseen > 0)
        ctx.err << "warning: " << unseen << " value(s) unseen in training were scored as the reference level\n";

    RunManifest m;
    m.subcommand = "predict";
    m.args = job.args();
    m.settings = job.settings();
    m.inputs = {{"model", job.model}, {"data", job.data}};
    m.outputs = {{"predictions", job.out}};
    write_manifest(m, manifest_path_for(job.out));
    if (!ctx.quiet) ctx.out << Json{{"rows", data.rows()}, {"unseen", unseen}}.dump() << '\n';
    return m;
}

// ---------------------------------------------------------------- rank

struct RankJob {
    std::string data, spec, target, out;
    R2vfConfig config;

    Json settings() const { return {{"data", data}, {"spec", spec}, {"target", target}, {"out", out}}; }
    static RankJob from(const Json& s, const Json& config) {
        return {s.at("data").get<std::string>(), s.at("spec").get<std::string>(), s.at("target").get<std::string>(),
                s.at("out").get<std::string>(), config_from_json(config)};
    }
    std::vector<std::string> args() const {
        std::vector<std::string> a = {"rank", "--data", data, "--spec", spec, "--target", target};
        const auto c = config_args(config, true);
        a.insert(a.end(), c.begin(), c.end());
        a.insert(a.end(), {"--out", out});
        return a;
    }
};

RunManifest execute(const RankJob& job, Context& ctx) {
    const auto specs = load_specs(job.spec, job.config);
    const auto data = load_csv(job.data, specs, TargetSpec::parse(job.target));
    const auto res = run_ranking(data, specs, job.config);
    for (const auto& d : res.ordinal.dropped)
        ctx.err << "warning: feature '" << d << "' has a single score bin\n";

    std::ostringstream text;
    text << "feature,category,score,bin\n";
    for (const auto& [feature, scores] : res.ranking.scores) {
        std::vector<std::pair<double, std::string>> order;
        for (const auto& [cat, s] : scores) order.emplace_back(s, cat);
        std::sort(order.begin(), order.end());
        const auto scheme = res.ordinal.schemes.find(feature);
        for (const auto& [s, cat] : order) {
            const std::size_t bin = scheme == res.ordinal.schemes.end() ? 0 : scheme->second.bin_of(s);
            text << csv_escape(feature) << ',' << csv_escape(cat) << ',' << format_double(s) << ',' << bin << '\n';
        }
    }
    ensure_parent(job.out);
    write_text_file(job.out, text.str());

    RunManifest m;
    m.subcommand = "rank";
    m.args = job.args();
    m.settings = job.settings();
    m.config = to_json(job.config);
    m.seed = job.config.seed;
    m.inputs = {{"data", job.data}, {"spec", job.spec}};
    m.outputs = {{"ranking", job.out}};
    write_manifest(m, manifest_path_for(job.out));
    if (!ctx.quiet) {
        Json bins = Json::object();
        for (const auto& [feature, scores] : res.ranking.scores) {
            const auto it = res.ordinal.schemes.find(feature);
            bins[feature] = it == res.ordinal.schemes.end() ? 1 : it->second.bin_count();
        }
        ctx.out << Json{{"bins", std::move(bins)}, {"chosen_lambda", res.report.chosen_lambda}}.dump() << '\n';
    }
    return m;
}

// ---------------------------------------------------------------- bench

struct BenchJob {
    std::string mode = "synthetic";
    int reps = 10;
    SynthConfig synth;
    std::string data, spec, target;
    int splits = 5;
    std::string methods = "r2vf,olvf,none";
    int workers = 1;
    bool timing = false;
    double test_fraction = 0.5;
    std::string out_dir;
    R2vfConfig config;

    Json settings() const {
        return {{"mode", mode},       {"reps", reps},       {"rows", synth.n_rows},
                {"professions", synth.n_professions},       {"noise_sd", synth.noise_sd},
                {"data", data},       {"spec", spec},       {"target", target},
                {"splits", splits},   {"methods", methods}, {"workers", workers},
                {"timing", timing},   {"test_fraction", test_fraction}, {"out_dir", out_dir}};
    }
    static BenchJob from(const Json& s, const Json& config) {
        BenchJob j;
        j.mode = s.at("mode").get<std::string>();
        j.reps = s.at("reps").get<int>();
        j.synth.n_rows = s.at("rows").get<std::size_t>();
        j.synth.n_professions = s.at("professions").get<int>();
        j.synth.noise_sd = s.at("noise_sd").get<double>();
        j.data = s.at("data").get<std::string>();
        j.spec = s.at("spec").get<std::string>();
        j.target = s.at("target").get<std::string>();
        j.splits = s.at("splits").get<int>();
        j.methods = s.at("methods").get<std::string>();
        j.workers = s.at("workers").get<int>();
        j.timing = s.at("timing").get<bool>();
        j.test_fraction = s.at("test_fraction").get<double>();
        j.out_dir = s.at("out_dir").get<std::string>();
        j.config = config_from_json(config);
        j.synth.seed = j.config.seed;
        return j;
    }
    std::vector<std::string> args() const {
        std::vector<std::string> a = {"bench", "--mode", mode};
        if (mode == "synthetic") {
            a.insert(a.end(), {"--reps", num(reps), "--rows", std::to_string(synth.n_rows), "--professions",
                               num(synth.n_professions), "--noise-sd", num(synth.noise_sd)});
        } else {
            a.insert(a.end(), {"--data", data, "--spec", spec, "--target", target, "--splits", num(splits)});
        }
        a.insert(a.end(), {"--methods", methods, "--workers", num(workers), "--timing", timing ? "on" : "off",
                           "--test-fraction", num(test_fraction)});
        const auto c = config_args(config, false);
        a.insert(a.end(), c.begin(), c.end());
        a.insert(a.end(), {"--out-dir", out_dir});
        return a;
    }
};

RunManifest execute(const BenchJob& job, Context& ctx) {
    BenchOptions opt;
    opt.methods = parse_methods(job.methods);
    opt.workers = job.workers;
    opt.timing = job.timing;
    opt.test_fraction = job.test_fraction;
    opt.on_record = [&](const BenchRecord& r) {
        if (r.failed)
            ctx.err << "warning: rep " << r.rep << " method " << to_string(r.method) << " failed: " << r.error << '\n';
        else if (!ctx.quiet)
            ctx.err << "rep " << r.rep << ' ' << to_string(r.method) << ' ' << to_string(r.metric) << '='
                    << format_double(r.metric_value) << " covariates=" << r.covariate_count << '\n';
    };
    RunManifest m;
    m.subcommand = "bench";
    m.args = job.args();
    m.settings = job.settings();
    m.config = to_json(job.config);
    m.seed = job.config.seed;

    BenchResult result;
    if (job.mode == "synthetic") {
        result = run_synthetic_bench(job.reps, job.synth, job.config, opt);
    } else {
        const auto specs = load_specs(job.spec, job.config);
        const auto data = load_csv(job.data, specs, TargetSpec::parse(job.target));
        result = run_csv_bench(data, specs, job.splits, job.config, opt);
        m.inputs = {{"data", job.data}, {"spec", job.spec}};
    }
    emit_report(result, job.out_dir);
    m.outputs = {{"raw", join_path(job.out_dir, "bench_raw.csv")},
                 {"summary", join_path(job.out_dir, "bench_summary.csv")}};
    write_manifest(m, join_path(job.out_dir, "manifest.json"));
    if (!ctx.quiet) write_summary_csv(result, ctx.out);
    return m;
}

// ---------------------------------------------------------------- replay

RunManifest replay(const RunManifest& m, const std::string& out_override, Context& ctx) {
    const auto override_path = [&](std::string& target) {
        if (!out_override.empty()) target = out_override;
    };
    if (m.subcommand == "simulate") {
        auto job = SimulateJob::from(m.settings);
        override_path(job.out);
        return execute(job, ctx);
    }
    if (m.subcommand == "fit") {
        auto job = FitJob::from(m.settings, m.config);
        override_path(job.out_dir);
        return execute(job, ctx);
    }
    if (m.subcommand == "predict") {
        auto job = PredictJob::from(m.settings);
        override_path(job.out);
        return execute(job, ctx);
    }
    if (m.subcommand == "rank") {
        auto job = RankJob::from(m.settings, m.config);
        override_path(job.out);
        return execute(job, ctx);
    }
    if (m.subcommand == "bench") {
        auto job = BenchJob::from(m.settings, m.config);
        override_path(job.out_dir);
        return execute(job, ctx);
    }
    throw InputError("manifest names unknown subcommand '" + m.subcommand + "'");
}

/// Compares the new outputs with the recorded checksums, role by role.
bool verify(const RunManifest& before, const RunManifest& after, std::ostream& err) {
    bool ok = true;
    for (const auto& [role, path] : before.outputs) {
        const auto old_sum = before.checksums.find(path);
        const auto now = after.outputs.find(role);
        if (old_sum == before.checksums.end() || now == after.outputs.end()) {
            err << "verify: no checksum for output '" << role << "'\n";
            ok = false;
            continue;
        }
        const auto sum = sha256_file(now->second);
        if (sum != old_sum->second) {
            err << "verify: output '" << role << "' differs (" << now->second << ")\n";
            ok = false;
        }
    }
    return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"R2VF: ranking to variable fusion for generalized linear models", "r2vf"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    bool quiet = false;
    auto add_quiet = [&](CLI::App* sub) { sub->add_flag("--quiet", quiet, "no summary on stdout"); };

    SimulateJob sim;
    auto* simulate = app.add_subcommand("simulate", "Generate the synthetic city/age/profession table");
    simulate->add_option("--rows", sim.synth.n_rows, "rows to generate")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--professions", sim.synth.n_professions, "distinct profession labels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    simulate->add_option("--noise-sd", sim.synth.noise_sd, "sd of the gaussian noise")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    simulate->add_option("--seed", sim.synth.seed, "random seed")->capture_default_str();
    simulate->add_option("--out", sim.out, "output CSV")->required();
    add_quiet(simulate);

    FitJob fitj;
    ConfigFlags fit_cfg;
    auto* fit_cmd = app.add_subcommand("fit", "Run the full pipeline and write model, clusters and report");
    fit_cmd->add_option("--data", fitj.data, "input CSV")->required();
    fit_cmd->add_option("--spec", fitj.spec, "feature spec JSON")->required();
    fit_cmd->add_option("--target", fitj.target, "target column or threshold expression, e.g. 'DEATHS > 0'")
        ->required();
    fit_cfg.add(fit_cmd, true);
    fit_cmd->add_option("--out-dir", fitj.out_dir, "output directory")->required();
    add_quiet(fit_cmd);

    PredictJob pred;
    auto* predict_cmd = app.add_subcommand("predict", "Score a CSV with a fitted model");
    predict_cmd->add_option("--model", pred.model, "model JSON written by fit")->required();
    predict_cmd->add_option("--data", pred.data, "input CSV")->required();
    predict_cmd->add_option("--out", pred.out, "predictions CSV")->required();
    add_quiet(predict_cmd);

    RankJob rankj;
    ConfigFlags rank_cfg;
    auto* rank_cmd = app.add_subcommand("rank", "Rank nominal categories and bin their scores");
    rank_cmd->add_option("--data", rankj.data, "input CSV")->required();
    rank_cmd->add_option("--spec", rankj.spec, "feature spec JSON")->required();
    rank_cmd->add_option("--target", rankj.target, "target column or threshold expression")->required();
    rank_cfg.add(rank_cmd, true);
    rank_cmd->add_option("--out", rankj.out, "ranking CSV")->required();
    add_quiet(rank_cmd);

    BenchJob benchj;
    ConfigFlags bench_cfg;
    std::string timing = "off";
    auto* bench_cmd = app.add_subcommand("bench", "Repeated train/test comparison of r2vf, olvf and none");
    bench_cmd->add_option("--mode", benchj.mode, "synthetic or csv")
        ->check(CLI::IsMember({"synthetic", "csv"}))
        ->capture_default_str();
    bench_cmd->add_option("--reps", benchj.reps, "synthetic repetitions")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--rows", benchj.synth.n_rows, "synthetic rows per repetition")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--professions", benchj.synth.n_professions, "synthetic profession labels")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--noise-sd", benchj.synth.noise_sd, "synthetic noise sd")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    bench_cmd->add_option("--data", benchj.data, "input CSV (csv mode)");
    bench_cmd->add_option("--spec", benchj.spec, "feature spec JSON (csv mode)");
    bench_cmd->add_option("--target", benchj.target, "target column or threshold expression (csv mode)");
    bench_cmd->add_option("--splits", benchj.splits, "train/test splits (csv mode)")
        ->check(CLI::Range(2, INT_MAX))
        ->capture_default_str();
    bench_cmd->add_option("--methods", benchj.methods, "comma-separated subset of r2vf,olvf,none")
        ->check(CLI::Validator(
            [](std::string& s) -> std::string {
                try {
                    parse_methods(s);
                    return "";
                } catch (const std::exception& e) {
                    return e.what();
                }
            },
            "LIST"))
        ->capture_default_str();
    bench_cmd->add_option("--workers", benchj.workers, "repetitions run in parallel")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    bench_cmd->add_option("--timing", timing, "record wall time per cell (makes reports run-dependent)")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    bench_cmd->add_option("--test-fraction", benchj.test_fraction, "share of rows held out for testing")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    bench_cfg.add(bench_cmd, false);
    bench_cmd->add_option("--out-dir", benchj.out_dir, "output directory")->required();
    add_quiet(bench_cmd);

    std::string manifest_path, replay_out;
    bool do_verify = false;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay_cmd->add_option("--manifest", manifest_path, "manifest JSON")->required();
    replay_cmd->add_option("--out", replay_out, "write to this file or directory instead of the recorded one");
    replay_cmd->add_flag("--verify", do_verify, "fail unless every output matches its recorded checksum");
    add_quiet(replay_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kUsage;
    }

    Context ctx{out, err, quiet};
    try {
        // Flag combinations CLI11 cannot express.
        if (bench_cmd->parsed()) {
            benchj.timing = timing == "on";
            if (!(benchj.test_fraction > 0.0 && benchj.test_fraction < 1.0))
                throw UsageError("--test-fraction must lie strictly between 0 and 1");
            if (benchj.mode == "csv" && (benchj.data.empty() || benchj.spec.empty() || benchj.target.empty()))
                throw UsageError("--mode csv needs --data, --spec and --target");
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return kUsage;
    }

    try {
        if (simulate->parsed()) {
            execute(sim, ctx);
        } else if (fit_cmd->parsed()) {
            fitj.config = fit_cfg.resolve();
            execute(fitj, ctx);
        } else if (predict_cmd->parsed()) {
            execute(pred, ctx);
        } else if (rank_cmd->parsed()) {
            rankj.config = rank_cfg.resolve();
            execute(rankj, ctx);
        } else if (bench_cmd->parsed()) {
            benchj.config = bench_cfg.resolve();
            benchj.synth.seed = benchj.config.seed;
            execute(benchj, ctx);
        } else if (replay_cmd->parsed()) {
            const auto before = manifest_from_json(read_json_file(manifest_path));
            const auto after = replay(before, replay_out, ctx);
            if (do_verify && !verify(before, after, err)) return kFailure;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}

}  // namespace r2vf
