#include "r2vf/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "r2vf/error.hpp"

namespace r2vf {

std::string_view to_string(RankingPenalty p) { return p == RankingPenalty::ridge ? "ridge" : "lasso"; }

RankingPenalty parse_ranking_penalty(std::string_view text) {
    if (text == "lasso") return RankingPenalty::lasso;
    if (text == "ridge") return RankingPenalty::ridge;
    throw InputError("unknown ranking penalty '" + std::string(text) + "' (expected lasso or ridge)");
}

std::string_view to_string(ReferencePolicy p) {
    return p == ReferencePolicy::target_mean ? "target_mean" : "most_frequent";
}

ReferencePolicy parse_reference_policy(std::string_view text) {
    if (text == "most_frequent") return ReferencePolicy::most_frequent;
    if (text == "target_mean") return ReferencePolicy::target_mean;
    throw InputError("unknown reference policy '" + std::string(text) + "'");
}

void R2vfConfig::validate() const {
    if (n < 2) throw InputError("n must be >= 2");
    if (m < 2) throw InputError("m must be >= 2");
    if (grid_size < 2) throw InputError("grid size must be >= 2");
    if (!(grid_ratio > 0.0 && grid_ratio < 1.0)) throw InputError("grid ratio must lie strictly between 0 and 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw InputError("validation fraction must lie strictly between 0 and 1");
    if (min_obs_per_bin < 1) throw InputError("min_obs_per_bin must be >= 1");
}

FeatureSpec make_spec(std::string name, FeatureKind kind, const R2vfConfig& config) {
    return FeatureSpec(std::move(name), kind, kind == FeatureKind::nominal ? config.m : config.n,
                       config.min_obs_per_bin);
}

Dataset SplitData::combined() const {
    Dataset out = train;
    for (std::size_t c = 0; c < out.columns.size(); ++c) {
        const auto& src = valid.column(out.columns[c].name);
        auto& dst = out.columns[c];
        dst.numbers.insert(dst.numbers.end(), src.numbers.begin(), src.numbers.end());
        dst.labels.insert(dst.labels.end(), src.labels.begin(), src.labels.end());
    }
    out.target.insert(out.target.end(), valid.target.begin(), valid.target.end());
    out.row_ids.insert(out.row_ids.end(), valid.row_ids.begin(), valid.row_ids.end());
    return out;
}

SplitData carve_validation(const Dataset& data, double fraction, std::uint64_t seed) {
    data.validate();
    const auto split = random_split(data.rows(), fraction, seed);
    if (split.first.empty() || split.second.empty())
        throw InputError("too few rows (" + std::to_string(data.rows()) + ") to carve a validation set");
    return {data.subset(split.first), data.subset(split.second)};
}

namespace {

void check_column_kind(const FeatureSpec& spec, const Column& col) {
    if (spec.ordered() == col.categorical())
        throw InputError("column '" + spec.name() + "' is " + (col.categorical() ? "categorical" : "numeric") +
                         " but declared " + std::string(to_string(spec.kind())));
}

bool constant(std::span<const double> y) {
    return std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
}

double null_intercept(std::span<const double> y, Family family) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    if (family == Family::gaussian) return mean;
    const double p = std::clamp(mean, 1e-6, 1.0 - 1e-6);
    return std::log(p / (1.0 - p));
}

GlmModel null_model(const EncodedDesign& design, std::span<const double> y, Family family) {
    GlmModel m;
    m.family = family;
    m.intercept = null_intercept(y, family);
    m.coefficients.assign(design.cols(), 0.0);
    m.blocks = design.blocks;
    return m;
}

std::map<std::string, double> scores_of(const FeatureEncoding& enc, const GlmModel& model, const FeatureBlock& block) {
    const auto& cats = std::get<CategoryLevels>(enc.levels()).categories;
    std::map<std::string, double> scores;
    for (std::size_t l = 0; l < cats.size(); ++l) scores[cats[l]] = 0.0;
    for (std::size_t k = 0; k < block.column_count(); ++k)
        scores[cats[block.level_of_column(k)]] = model.coefficients[block.first_column + k];
    return scores;
}

std::map<std::string, BinLimits> nominal_limits(std::span<const FeatureSpec> specs) {
    std::map<std::string, BinLimits> limits;
    for (const auto& s : specs)
        if (!s.ordered()) limits[s.name()] = {s.max_bins(), s.min_obs_per_bin()};
    return limits;
}

}  // namespace

InitialEncoding initial_encodings(const Dataset& train, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    InitialEncoding out;
    for (const auto& spec : specs) {
        const auto& col = train.column(spec.name());
        check_column_kind(spec, col);
        if (spec.ordered()) {
            try {
                auto scheme = build_percentile_bins(col.numbers, spec.max_bins(), spec.min_obs_per_bin(), spec.name());
                out.encodings.push_back(FeatureEncoding::split_bins(spec.name(), spec.kind(), std::move(scheme)));
            } catch (const DegenerateFeatureError&) {
                out.dropped.push_back(spec.name());
            }
        } else {
            if (col.labels.empty()) throw InputError("no training rows for '" + spec.name() + "'");
            const std::string ref = config.nominal_reference == ReferencePolicy::target_mean
                                        ? select_reference_by_target_mean(col.labels, train.target)
                                        : select_reference(spec, col.labels);
            out.encodings.push_back(FeatureEncoding::one_hot_categories(spec.name(), col.labels, ref));
        }
    }
    return out;
}

RankResult step3_rank(const SplitData& data, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    config.validate();
    auto init = initial_encodings(data.train, specs, config);
    const auto train = encode_design(init.encodings, data.train);
    const auto valid = encode_design(init.encodings, data.valid);
    if (train.cols() == 0) throw DegenerateGridError("no covariates left to rank with");
    const auto penalty = PenaltySpec::uniform(train.cols(), config.ranking_penalty == RankingPenalty::lasso ? 1 : 2);
    const auto grid = lambda_grid(train, data.train.target, config.family, penalty, config.grid_size, config.grid_ratio);
    auto search = lambda_search(train, data.train.target, valid, data.valid.target, config.family, penalty, grid,
                                config.solver);

    RankResult out;
    for (std::size_t b = 0; b < init.encodings.size(); ++b) {
        const auto& enc = init.encodings[b];
        if (enc.kind() == FeatureKind::nominal)
            out.ranking.scores[enc.feature()] = scores_of(enc, search.model, search.model.blocks[b]);
    }
    out.model = std::move(search.model);
    out.report = std::move(search.report);
    out.encodings = std::move(init.encodings);
    out.dropped = std::move(init.dropped);
    return out;
}

OrdinalizeResult step4_ordinalize(const Dataset& train, const Ranking& ranking,
                                  const std::map<std::string, BinLimits>& limits) {
    OrdinalizeResult out;
    for (const auto& [feature, scores] : ranking.scores) {
        const auto& col = train.column(feature);
        std::vector<double> values(col.labels.size());
        for (std::size_t r = 0; r < values.size(); ++r) {
            const auto it = scores.find(col.labels[r]);
            if (it == scores.end())
                throw InputError("ranking of '" + feature + "' has no score for category '" + col.labels[r] + "'");
            values[r] = it->second;
        }
        const auto lim = limits.find(feature);
        if (lim == limits.end()) throw InputError("no bin limits given for '" + feature + "'");
        try {
            out.schemes.emplace(feature,
                                build_percentile_bins(values, lim->second.max_bins, lim->second.min_obs, feature));
        } catch (const DegenerateFeatureError&) {
            out.dropped.push_back(feature);
        }
    }
    return out;
}

OrdinalizeResult step4_ordinalize(const Dataset& train, const Ranking& ranking, int m, int min_obs) {
    std::map<std::string, BinLimits> limits;
    for (const auto& [feature, scores] : ranking.scores) limits[feature] = {m, min_obs};
    return step4_ordinalize(train, ranking, limits);
}

FuseResult step6_fuse(const SplitData& data, std::span<const FeatureEncoding> step3_encodings, const Ranking& ranking,
                      const OrdinalizeResult& ordinal, const R2vfConfig& config) {
    FuseResult out;
    for (const auto& enc : step3_encodings) {
        if (enc.kind() != FeatureKind::nominal) {
            if (enc.coding() != Coding::split)
                throw InputError("step6_fuse: ordered feature '" + enc.feature() + "' must be split-coded");
            out.encodings.push_back(enc);
            continue;
        }
        const auto scheme = ordinal.schemes.find(enc.feature());
        if (scheme == ordinal.schemes.end()) continue;
        out.encodings.push_back(
            FeatureEncoding::ranked_split(enc.feature(), ranking.scores.at(enc.feature()), scheme->second));
    }
    const auto train = encode_design(out.encodings, data.train);
    const auto valid = encode_design(out.encodings, data.valid);
    if (train.cols() == 0) throw DegenerateGridError("no covariates left to fuse");
    const auto penalty = PenaltySpec::uniform(train.cols(), 1);
    const auto grid = lambda_grid(train, data.train.target, config.family, penalty, config.grid_size, config.grid_ratio);
    auto search = lambda_search(train, data.train.target, valid, data.valid.target, config.family, penalty, grid,
                                config.solver);
    out.model = std::move(search.model);
    out.report = std::move(search.report);
    return out;
}

std::vector<double> R2vfModel::predict(const Dataset& data, std::size_t* unseen) const {
    const auto design = encode_design(encodings, data);
    if (unseen) *unseen = design.unseen;
    return r2vf::predict(glm, design);
}

namespace {

R2vfResult intercept_only(const SplitData& split, std::span<const FeatureSpec> specs, const R2vfConfig& config,
                          const std::string& why) {
    R2vfResult out;
    auto init = initial_encodings(split.train, specs, config);
    for (const auto& enc : init.encodings) {
        out.model.encodings.push_back(
            FeatureEncoding::grouped(enc, std::vector<std::size_t>(enc.level_count(), 0), Coding::split, 0));
    }
    const auto all = split.combined();
    const auto design = encode_design(out.model.encodings, all);
    out.model.specs.assign(specs.begin(), specs.end());
    out.model.glm = null_model(design, all.target, config.family);
    for (const auto& enc : out.model.encodings) {
        FeatureClusters fc;
        fc.feature = enc.feature();
        const auto base = FeatureEncoding::grouped(enc, {}, Coding::split, 0);
        fc.levels = base.group_labels();
        fc.cluster_of_level.assign(fc.levels.size(), 0);
        fc.coefficients = {0.0};
        fc.members = enc.group_members();
        out.clusters.features.push_back(std::move(fc));
    }
    out.dropped = std::move(init.dropped);
    out.warnings.push_back("intercept-only model: " + why);
    return out;
}

// Tags solver failures with the algorithm step they came from.
template <typename F>
auto in_step(const char* step, F&& f) {
    try {
        return f();
    } catch (const DegenerateGridError&) {
        throw;
    } catch (const InputError& e) {
        throw InputError(std::string(step) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(step) + ": " + e.what());
    }
}

void check_target(const Dataset& data, Family family) {
    for (double t : data.target) {
        if (!std::isfinite(t)) throw InputError("target '" + data.target_name + "' has non-finite values");
        if (family == Family::binomial && t != 0.0 && t != 1.0)
            throw InputError("binomial family needs a 0/1 target, but '" + data.target_name + "' contains " +
                             std::to_string(t));
    }
}

}  // namespace

R2vfResult run_r2vf(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    config.validate();
    if (data.rows() == 0) throw InputError("run_r2vf: no rows");
    if (specs.empty()) throw InputError("run_r2vf: no features");
    check_target(data, config.family);
    const auto split = carve_validation(data, config.validation_fraction, config.seed);

    auto finish = [&](R2vfResult r) {
        r.train_rows = split.train.row_ids;
        r.valid_rows = split.valid.row_ids;
        return r;
    };
    if (constant(data.target)) return finish(intercept_only(split, specs, config, "target is constant"));

    RankResult rank;
    try {
        rank = in_step("step 3 (ranking)", [&] { return step3_rank(split, specs, config); });
    } catch (const DegenerateGridError& e) {
        return finish(intercept_only(split, specs, config, e.what()));
    }

    auto ordinal = in_step("step 4 (ordinalize)",
                           [&] { return step4_ordinalize(split.train, rank.ranking, nominal_limits(specs)); });

    R2vfResult out;
    out.ranking = rank.ranking;
    out.rank_report = rank.report;
    out.ordinal_schemes = ordinal.schemes;
    out.dropped = rank.dropped;
    for (const auto& d : ordinal.dropped) {
        out.dropped.push_back(d);
        out.warnings.push_back("feature '" + d + "' collapsed to a single bin after ranking and was dropped");
    }

    FuseResult fuse;
    try {
        fuse = in_step("step 6 (fusion)",
                       [&] { return step6_fuse(split, rank.encodings, rank.ranking, ordinal, config); });
    } catch (const DegenerateGridError& e) {
        auto r = intercept_only(split, specs, config, e.what());
        r.ranking = out.ranking;
        r.rank_report = out.rank_report;
        return finish(std::move(r));
    }
    out.fuse_report = fuse.report;
    out.clusters = extract_clusters(fuse.model);
    out.model.specs.assign(specs.begin(), specs.end());
    out.model.encodings = fuse.encodings;
    out.model.glm = fuse.model;

    if (config.refit) {
        try {
            auto refit = step7_refit(split.combined(), fuse.encodings, out.clusters, config.family, config.solver);
            for (std::size_t b = 0; b < refit.model.blocks.size(); ++b) {
                const auto& block = refit.model.blocks[b];
                auto& fc = out.clusters.features[b];
                for (std::size_t k = 0; k < block.column_count(); ++k)
                    fc.coefficients[block.level_of_column(k)] = refit.model.coefficients[block.first_column + k];
            }
            out.model.encodings = std::move(refit.encodings);
            out.model.glm = std::move(refit.model);
            out.refit_applied = true;
        } catch (const RankDeficientError& e) {
            out.warnings.push_back(std::string("refit skipped, keeping the fused model: ") + e.what());
        } catch (const NonConvergenceError& e) {
            out.warnings.push_back(std::string("refit skipped, keeping the fused model: ") + e.what());
        }
    }
    return finish(std::move(out));
}

RankOnlyResult run_ranking(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    config.validate();
    check_target(data, config.family);
    const auto split = carve_validation(data, config.validation_fraction, config.seed);
    RankOnlyResult out;
    RankResult rank;
    try {
        rank = in_step("step 3 (ranking)", [&] { return step3_rank(split, specs, config); });
    } catch (const DegenerateGridError&) {
        // Nothing to learn from: every category keeps the reference score.
        for (const auto& enc : initial_encodings(split.train, specs, config).encodings)
            if (enc.kind() == FeatureKind::nominal)
                for (const auto& c : std::get<CategoryLevels>(enc.levels()).categories)
                    rank.ranking.scores[enc.feature()][c] = 0.0;
    }
    out.ordinal = step4_ordinalize(split.train, rank.ranking, nominal_limits(specs));
    out.ranking = std::move(rank.ranking);
    out.report = std::move(rank.report);
    return out;
}

BaselineResult fit_olvf(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    config.validate();
    const auto split = carve_validation(data, config.validation_fraction, config.seed);
    auto init = initial_encodings(split.train, specs, config);
    const auto train = encode_design(init.encodings, split.train);
    const auto valid = encode_design(init.encodings, split.valid);
    BaselineResult out;
    out.model.specs.assign(specs.begin(), specs.end());
    try {
        if (train.cols() == 0) throw DegenerateGridError("no covariates");
        const auto penalty = PenaltySpec::uniform(train.cols(), 1);
        const auto grid =
            lambda_grid(train, split.train.target, config.family, penalty, config.grid_size, config.grid_ratio);
        auto search = lambda_search(train, split.train.target, valid, split.valid.target, config.family, penalty,
                                    grid, config.solver);
        out.model.glm = std::move(search.model);
        out.report = std::move(search.report);
    } catch (const DegenerateGridError&) {
        out.model.glm = null_model(train, split.train.target, config.family);
    }
    out.model.encodings = std::move(init.encodings);
    return out;
}

BaselineResult fit_unregularized(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config) {
    config.validate();
    data.validate();
    auto init = initial_encodings(data, specs, config);
    BaselineResult out;
    out.model.specs.assign(specs.begin(), specs.end());
    for (auto& enc : init.encodings) {
        if (enc.kind() == FeatureKind::nominal) {
            out.model.encodings.push_back(std::move(enc));
        } else {
            out.model.encodings.push_back(FeatureEncoding::one_hot_bins(
                enc.feature(), enc.kind(), std::get<BinLevels>(enc.levels()).scheme));
        }
    }
    const auto design = encode_design(out.model.encodings, data);
    try {
        out.model.glm = fit(design, data.target, config.family, PenaltySpec::unpenalized(design.cols()), nullptr,
                            config.solver);
    } catch (const NonConvergenceError& e) {
        // Separated binomial data drifts forever without a penalty; score with the last iterate.
        out.model.glm = e.last_iterate();
    }
    out.report.lambdas = {0.0};
    out.report.nonzero_count = out.model.glm.nonzero_count();
    return out;
}

}  // namespace r2vf
