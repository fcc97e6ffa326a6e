#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "r2vf/data.hpp"
#include "r2vf/error.hpp"
#include "r2vf/pipeline.hpp"
#include "r2vf/serialize.hpp"
#include "support.hpp"

using namespace r2vf;
using r2vf::test::Rng;

namespace {

Dataset table(std::vector<Column> cols, std::vector<double> y) {
    Dataset d;
    d.columns = std::move(cols);
    d.target = std::move(y);
    return d;
}

Column nominal(std::string name, std::vector<std::string> labels) {
    return {std::move(name), FeatureKind::nominal, {}, std::move(labels)};
}

Column numeric(std::string name, std::vector<double> values) {
    return {std::move(name), FeatureKind::numeric, std::move(values), {}};
}

GlmModel split_model(std::vector<std::pair<std::string, std::vector<double>>> features) {
    GlmModel m;
    for (auto& [name, deltas] : features) {
        FeatureBlock b;
        b.feature = name;
        b.coding = Coding::split;
        b.first_column = m.coefficients.size();
        for (std::size_t l = 0; l <= deltas.size(); ++l) b.levels.push_back("b" + std::to_string(l));
        m.coefficients.insert(m.coefficients.end(), deltas.begin(), deltas.end());
        m.blocks.push_back(b);
    }
    return m;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto rav = ranks(a), rbv = ranks(b);
    const Eigen::VectorXd ra = test::vec(rav), rb = test::vec(rbv);
    const Eigen::VectorXd ca = ra.array() - ra.mean(), cb = rb.array() - rb.mean();
    return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

const Dataset& city_data() {
    static const Dataset d = generate(SynthConfig{});
    return d;
}

}  // namespace

TEST_CASE("config validation") {
    R2vfConfig c;
    CHECK_NOTHROW(c.validate());
    c.n = 1;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.m = 1;
    CHECK_THROWS_AS(c.validate(), InputError);
    c = {};
    c.validation_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    CHECK(make_spec("age", FeatureKind::numeric, R2vfConfig{}).max_bins() == 30);
    CHECK(make_spec("city", FeatureKind::nominal, R2vfConfig{}).max_bins() == 75);
}

TEST_CASE("validation carve is a partition") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 4 + rng() % 300;
        std::vector<double> x(n);
        std::iota(x.begin(), x.end(), 0.0);
        const auto d = table({numeric("x", x)}, x);
        const auto s = carve_validation(d, 0.25, rng());
        std::set<std::size_t> tr(s.train.row_ids.begin(), s.train.row_ids.end());
        for (auto r : s.valid.row_ids) CHECK(tr.count(r) == 0);
        CHECK(s.train.rows() + s.valid.rows() == n);
        CHECK(s.valid.rows() == static_cast<std::size_t>(std::llround(0.25 * static_cast<double>(n))));
        for (std::size_t i = 0; i < s.valid.rows(); ++i) CHECK(s.valid.column("x").numbers[i] == s.valid.row_ids[i]);
    }
}

TEST_CASE("cluster extraction") {
    SUBCASE("mixed zeros") {
        const auto map = extract_clusters(split_model({{"f", {0, 3, 0, 0, -1}}}));
        const auto& fc = map.at("f");
        CHECK(fc.cluster_of_level == std::vector<std::size_t>{0, 0, 1, 1, 1, 2});
        CHECK(fc.coefficients == std::vector<double>{0, 3, 2});
        CHECK(fc.members[1] == std::vector<std::string>{"b2", "b3", "b4"});
    }
    SUBCASE("all zero") {
        const auto map = extract_clusters(split_model({{"f", {0, 0, 0}}, {"g", {}}}));
        CHECK(map.at("f").cluster_count() == 1);
        CHECK(map.at("g").cluster_count() == 1);
    }
    SUBCASE("all nonzero") {
        const auto map = extract_clusters(split_model({{"f", {1, -1, 2}}}));
        CHECK(map.at("f").cluster_count() == 4);
        CHECK(map.at("f").coefficients == std::vector<double>{0, 1, 0, 2});
    }
    SUBCASE("one-hot blocks are refused") {
        auto m = split_model({{"f", {1}}});
        m.blocks[0].coding = Coding::one_hot;
        CHECK_THROWS_AS(extract_clusters(m), InputError);
    }
}

TEST_CASE("clusters are contiguous runs") {
    Rng rng(5);
    for (int t = 0; t < 300; ++t) CHECK(test::cluster_contiguity_case(rng) == "");
}

TEST_CASE("ordinalization") {
    SUBCASE("equal scores share a bin") {
        const auto d = table({nominal("c", {"a", "b", "c", "a", "b", "c"})}, std::vector<double>(6, 0));
        Ranking r;
        r.scores["c"] = {{"a", 1.0}, {"b", 1.0}, {"c", 2.0}};
        const auto o = step4_ordinalize(d, r, 75, 1);
        const auto enc = FeatureEncoding::ranked_split("c", r.scores["c"], o.schemes.at("c"));
        CHECK(enc.level_indices(d.column("c")) == std::vector<std::size_t>{0, 0, 1, 0, 0, 1});
        CHECK(o.schemes.at("c").bin_count() == 2);
    }
    SUBCASE("26 distinct scores give 26 ordered bins") {
        std::vector<std::string> labels;
        Ranking r;
        for (int k = 0; k < 26; ++k) {
            const std::string c(1, static_cast<char>('a' + k));
            labels.push_back(c);
            r.scores["city"][c] = std::sin(k * 1.7);
        }
        const auto d = table({nominal("city", labels)}, std::vector<double>(26, 0));
        const auto o = step4_ordinalize(d, r, 26, 1);
        const auto& s = o.schemes.at("city");
        CHECK(s.bin_count() == 26);
        for (const auto& [c1, s1] : r.scores["city"])
            for (const auto& [c2, s2] : r.scores["city"])
                if (s1 < s2) CHECK(s.bin_of(s1) < s.bin_of(s2));
    }
    SUBCASE("all scores equal drops the feature") {
        const auto d = table({nominal("c", {"a", "b"})}, {0, 0});
        Ranking r;
        r.scores["c"] = {{"a", 0.0}, {"b", 0.0}};
        const auto o = step4_ordinalize(d, r, 75, 1);
        CHECK(o.schemes.empty());
        CHECK(o.dropped == std::vector<std::string>{"c"});
    }
    SUBCASE("missing score") {
        const auto d = table({nominal("c", {"a", "z"})}, {0, 0});
        Ranking r;
        r.scores["c"] = {{"a", 0.0}};
        CHECK_THROWS_AS(step4_ordinalize(d, r, 75, 1), InputError);
    }
}

TEST_CASE("ordinalization is monotone in the score") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int cats = std::uniform_int_distribution<int>(2, 40)(rng);
        Ranking r;
        std::vector<std::string> labels;
        for (int k = 0; k < cats; ++k) {
            const std::string c = "c" + std::to_string(k);
            r.scores["f"][c] = std::uniform_int_distribution<int>(-6, 6)(rng) * 0.5;
            const int copies = 1 + static_cast<int>(rng() % 8);
            for (int i = 0; i < copies; ++i) labels.push_back(c);
        }
        const auto d = table({nominal("f", labels)}, std::vector<double>(labels.size(), 0));
        const auto o = step4_ordinalize(d, r, 2 + static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 6));
        if (o.schemes.empty()) continue;
        const auto& s = o.schemes.at("f");
        for (const auto& [c1, s1] : r.scores["f"])
            for (const auto& [c2, s2] : r.scores["f"]) {
                if (s1 < s2) CHECK(s.bin_of(s1) <= s.bin_of(s2));
                if (s1 == s2) CHECK(s.bin_of(s1) == s.bin_of(s2));
            }
    }
}

TEST_CASE("ranking recovers a two-group shift") {
    Rng rng(11);
    std::vector<std::string> labels;
    std::vector<double> y;
    std::normal_distribution<double> g(0, 0.5);
    for (int i = 0; i < 2000; ++i) {
        const int k = static_cast<int>(rng() % 20);
        labels.push_back("k" + std::to_string(k));
        y.push_back((k % 2 ? 10.0 : 0.0) + g(rng));
    }
    const auto d = table({nominal("k", labels)}, y);
    const std::vector<FeatureSpec> specs{make_spec("k", FeatureKind::nominal, R2vfConfig{})};
    R2vfConfig config;
    const auto split = carve_validation(d, config.validation_fraction, config.seed);
    const auto rank = step3_rank(split, specs, config);
    auto gap = [](const std::map<std::string, double>& score) {
        double hi = 0, lo = 0;
        for (const auto& [c, s] : score) (std::stoi(c.substr(1)) % 2 ? hi : lo) += s / 10.0;
        return hi - lo;
    };
    // Least squares on the same one-hot design.
    const auto design = encode_design(rank.encodings, split.train);
    const auto beta = test::ols(design.x, split.train.target);
    std::map<std::string, double> ols_scores;
    const auto& block = design.blocks[0];
    const auto& cats = std::get<CategoryLevels>(rank.encodings[0].levels()).categories;
    for (const auto& c : cats) ols_scores[c] = 0.0;
    for (std::size_t k = 0; k < block.column_count(); ++k)
        ols_scores[cats[block.level_of_column(k)]] = beta(static_cast<Eigen::Index>(k + 1));
    CHECK(gap(ols_scores) == doctest::Approx(10).epsilon(0.02));
    CHECK(gap(rank.ranking.scores.at("k")) == doctest::Approx(gap(ols_scores)).epsilon(0.02));
    CHECK(rank.ranking.scores.at("k").size() == 20);
}

TEST_CASE("ranking of categories without signal stays in a narrow band") {
    Rng rng(13);
    std::vector<std::string> labels;
    std::vector<double> y;
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 3000; ++i) {
        labels.push_back("k" + std::to_string(rng() % 30));
        y.push_back(3.0 + g(rng));
    }
    const auto d = table({nominal("k", labels)}, y);
    const std::vector<FeatureSpec> specs{make_spec("k", FeatureKind::nominal, R2vfConfig{})};
    const auto r = run_ranking(d, specs, R2vfConfig{});
    const auto& s = r.ranking.scores.at("k");
    double lo = 0, hi = 0;
    int zeros = 0;
    for (const auto& [c, v] : s) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        zeros += v == 0.0;
    }
    CHECK(hi - lo < 1.0);
    CHECK(zeros >= 15);
}

TEST_CASE("ridge ranking gives distinct scores") {
    Rng rng(17);
    std::vector<std::string> labels;
    std::vector<double> y;
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 600; ++i) {
        const int k = static_cast<int>(rng() % 12);
        labels.push_back("k" + std::to_string(k));
        y.push_back(k * 0.3 + g(rng));
    }
    const auto d = table({nominal("k", labels)}, y);
    R2vfConfig config;
    config.ranking_penalty = RankingPenalty::ridge;
    const std::vector<FeatureSpec> specs{make_spec("k", FeatureKind::nominal, config)};
    const auto r = run_ranking(d, specs, config);
    std::set<double> distinct;
    for (const auto& [c, v] : r.ranking.scores.at("k")) distinct.insert(v);
    CHECK(distinct.size() == 12);
}

TEST_CASE("single-category feature ranks to one zero score") {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
        x.push_back(i % 20);
        y.push_back(i % 20 > 9 ? 4.0 : 0.0);
    }
    const auto d = table({nominal("f", std::vector<std::string>(200, "only")), numeric("x", x)}, y);
    R2vfConfig config;
    const std::vector<FeatureSpec> specs{make_spec("f", FeatureKind::nominal, config), make_spec("x", FeatureKind::numeric, config)};
    const auto r = run_ranking(d, specs, config);
    CHECK(r.ranking.scores.at("f") == std::map<std::string, double>{{"only", 0.0}});
    CHECK(r.ordinal.dropped == std::vector<std::string>{"f"});
}

TEST_CASE("city ranking follows the true effects") {
    const auto& d = city_data();
    R2vfConfig config;
    const auto specs = synthetic_specs(config);
    const auto r = run_ranking(d, specs, config);
    std::vector<double> score, truth;
    for (const auto& [c, s] : r.ranking.scores.at("city")) {
        score.push_back(s);
        truth.push_back(city_effect(c));
    }
    CHECK(score.size() == 26);
    CHECK(spearman(score, truth) > 0.9);
}

TEST_CASE("nominal ordinalization respects m on many professions") {
    SynthConfig sc;
    sc.n_professions = 1000;
    const auto d = generate(sc);
    R2vfConfig config;
    const auto r = run_ranking(d, synthetic_specs(config), config);
    REQUIRE(r.ordinal.schemes.count("profession"));
    CHECK(r.ordinal.schemes.at("profession").bin_count() <= 75);
    CHECK(r.ordinal.schemes.at("city").bin_count() <= 26);
}

TEST_CASE("fusion at the top of the grid and at zero") {
    const auto& d = city_data();
    R2vfConfig config;
    const auto specs = synthetic_specs(config);
    const auto split = carve_validation(d, config.validation_fraction, config.seed);
    const auto rank = step3_rank(split, specs, config);
    const auto ord = step4_ordinalize(split.train, rank.ranking, 75, config.min_obs_per_bin);
    const auto fused = step6_fuse(split, rank.encodings, rank.ranking, ord, config);
    const auto design = encode_design(fused.encodings, split.train);
    const auto pen = PenaltySpec::uniform(design.cols(), 1);
    const auto top = fit(design, split.train.target, Family::gaussian,
                         pen.with_lambda(lambda_grid(design, split.train.target, Family::gaussian, pen).front()));
    CHECK(top.nonzero_count() == 0);
    for (const auto& fc : extract_clusters(top).features) CHECK(fc.cluster_count() == 1);

    const auto clusters = extract_clusters(fused.model);
    CHECK(clusters.at("city").cluster_count() < 26);
    CHECK(fused.report.chosen_lambda == fused.model.lambda);
    // Every feature is split-coded in the fused design.
    for (const auto& b : fused.model.blocks) CHECK(b.coding == Coding::split);
}

TEST_CASE("unpenalized fusion keeps every bin") {
    Rng rng(19);
    for (int t = 0; t < 20; ++t) {
        const std::size_t bins = 2 + rng() % 6;
        const auto level = test::random_levels(60, bins, rng);
        std::vector<double> y(60);
        for (std::size_t i = 0; i < 60; ++i) y[i] = static_cast<double>(level[i]) * 1.3 + std::normal_distribution<double>(0, 1)(rng);
        EncodedDesign design;
        design.x = split_columns(level, bins);
        FeatureBlock b;
        b.feature = "f";
        b.coding = Coding::split;
        for (std::size_t l = 0; l < bins; ++l) b.levels.push_back(std::to_string(l));
        design.blocks = {b};
        const auto m = fit(design, y, Family::gaussian, PenaltySpec::uniform(bins - 1, 1, 0.0));
        CHECK(extract_clusters(m).at("f").cluster_count() == bins);
    }
}

TEST_CASE("split-coded l1 solves the fused problem") {
    Rng rng(23);
    for (int t = 0; t < 8; ++t) {
        const std::size_t bins = 2 + rng() % 5;
        const std::size_t n = 10 + rng() % 40;
        const auto level = test::random_levels(n, bins, rng);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = (level[i] > bins / 2 ? 2.0 : 0.0) + std::normal_distribution<double>(0, 1)(rng);
        const auto x = split_columns(level, bins);
        const auto pen = PenaltySpec::uniform(bins - 1, 1, 0.0);
        const double lambda = lambda_max(x, y, Family::gaussian, pen) * std::uniform_real_distribution<double>(0.01, 0.9)(rng);
        const auto m = fit(x, y, Family::gaussian, pen.with_lambda(lambda));
        auto beta = back_transform(m.coefficients);
        beta.insert(beta.begin(), 0.0);
        const double got = test::fused_objective(level, y, m.intercept, beta, lambda);
        CHECK(got - test::fused_oracle(level, y, bins, lambda) < 1e-4);
        CHECK(got == doctest::Approx(penalized_objective(x, y, Family::gaussian, pen.with_lambda(lambda), m.intercept, m.coefficients)));
    }
}

TEST_CASE("refit on the original bins is least squares") {
    Rng rng(29);
    const std::size_t bins = 6;
    const auto level = test::random_levels(300, bins, rng);
    std::vector<double> x(300), y(300);
    for (std::size_t i = 0; i < 300; ++i) {
        x[i] = static_cast<double>(level[i]);
        y[i] = std::sin(x[i]) * 4 + std::normal_distribution<double>(0, 1)(rng);
    }
    const auto d = table({numeric("x", x)}, y);
    const auto enc = FeatureEncoding::split_bins("x", FeatureKind::numeric, BinningScheme{"x", {1, 2, 3, 4, 5}});
    const auto map = extract_clusters(split_model({{"x", {1, 1, 1, 1, 1}}}));
    const auto refit = step7_refit(d, std::vector<FeatureEncoding>{enc}, map, Family::gaussian);
    const auto hot = one_hot_columns(level, bins, 0);
    const Eigen::VectorXd expect = test::with_intercept(hot) * test::ols(hot, y);
    const auto got = refit.model.coefficients;
    REQUIRE(got.size() == bins - 1);
    const auto pred = predict(refit.model, encode_design(refit.encodings, d));
    for (std::size_t i = 0; i < 300; ++i) CHECK(pred[i] == doctest::Approx(expect(static_cast<Eigen::Index>(i))).epsilon(1e-9));
}

TEST_CASE("refit recovers cluster-constant effects") {
    Rng rng(31);
    std::vector<double> a(400), b(400), y(400);
    const std::vector<double> effect_a{0, 0, 2.5, 2.5, 2.5, -1};
    const std::vector<double> effect_b{0, 7, 7, 7};
    for (std::size_t i = 0; i < 400; ++i) {
        a[i] = static_cast<double>(rng() % 6);
        b[i] = static_cast<double>(rng() % 4);
        y[i] = 1.0 + effect_a[static_cast<std::size_t>(a[i])] + effect_b[static_cast<std::size_t>(b[i])];
    }
    const auto d = table({numeric("a", a), numeric("b", b)}, y);
    const std::vector<FeatureEncoding> encs{
        FeatureEncoding::split_bins("a", FeatureKind::numeric, BinningScheme{"a", {1, 2, 3, 4, 5}}),
        FeatureEncoding::split_bins("b", FeatureKind::numeric, BinningScheme{"b", {1, 2, 3}})};
    const auto map = extract_clusters(split_model({{"a", {0, 9, 0, 0, 9}}, {"b", {9, 0, 0}}}));
    const auto refit = step7_refit(d, encs, map, Family::gaussian);
    REQUIRE(refit.model.coefficients.size() == 3);
    CHECK(refit.model.intercept == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(refit.model.coefficients[0] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(refit.model.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(refit.model.coefficients[2] == doctest::Approx(7.0).epsilon(1e-9));

    SUBCASE("single-cluster feature adds no column") {
        const auto flat = extract_clusters(split_model({{"a", {0, 9, 0, 0, 9}}, {"b", {0, 0, 0}}}));
        CHECK(step7_refit(d, encs, flat, Family::gaussian).model.coefficients.size() == 2);
    }
    SUBCASE("collinear clusters are rank deficient") {
        const auto twin = table({numeric("a", a), numeric("b", a)}, y);
        const std::vector<FeatureEncoding> same{encs[0], FeatureEncoding::split_bins("b", FeatureKind::numeric, BinningScheme{"b", {1, 2, 3, 4, 5}})};
        const auto m2 = extract_clusters(split_model({{"a", {1, 1, 1, 1, 1}}, {"b", {1, 1, 1, 1, 1}}}));
        CHECK_THROWS_AS(step7_refit(twin, same, m2, Family::gaussian), RankDeficientError);
    }
}

TEST_CASE("constant target gives an intercept-only model") {
    const auto& src = city_data();
    Dataset d = src;
    std::fill(d.target.begin(), d.target.end(), 4.25);
    R2vfConfig config;
    const auto r = run_r2vf(d, synthetic_specs(config), config);
    CHECK(r.model.covariate_count() == 0);
    CHECK(r.model.glm.intercept == 4.25);
    for (const auto& fc : r.clusters.features) CHECK(fc.cluster_count() == 1);
    CHECK(!r.warnings.empty());
    const auto pred = r.model.predict(d);
    for (double p : pred) CHECK(p == 4.25);
}

TEST_CASE("plateaus are recovered") {
    std::vector<double> x, y;
    for (int rep = 0; rep < 10; ++rep)
        for (int v = 0; v < 100; ++v) {
            x.push_back(v);
            y.push_back(v < 30 ? 0.0 : v < 70 ? 5.0 : -3.0);
        }
    const auto d = table({numeric("x", x)}, y);
    R2vfConfig config;
    // One bin per distinct value, so bin edges cannot straddle a step.
    const std::vector<FeatureSpec> specs{FeatureSpec("x", FeatureKind::numeric, 100, 1)};
    const auto r = run_r2vf(d, specs, config);
    const auto& fc = r.clusters.at("x");
    REQUIRE(fc.cluster_count() == 3);
    const auto& scheme = std::get<BinLevels>(r.model.encodings[0].levels()).scheme;
    for (int v = 1; v < 100; ++v) {
        const bool jump = v == 30 || v == 70;
        const bool split = fc.cluster_of_level[scheme.bin_of(v)] != fc.cluster_of_level[scheme.bin_of(v - 1)];
        CHECK(jump == split);
    }
    const auto pred = r.model.predict(d);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-6).scale(1));
}

TEST_CASE("pipeline determinism") {
    const auto& d = city_data();
    R2vfConfig config;
    const auto specs = synthetic_specs(config);
    const auto a = run_r2vf(d, specs, config);
    const auto b = run_r2vf(d, specs, config);
    CHECK(dump(to_json(a.clusters)) == dump(to_json(b.clusters)));
    CHECK(dump(to_json(a.model)) == dump(to_json(b.model)));
    CHECK(a.refit_applied);
}

TEST_CASE("cluster map predicts like the fused model") {
    const auto& d = city_data();
    R2vfConfig config;
    config.refit = false;
    const auto specs = synthetic_specs(config);
    const auto r = run_r2vf(d, specs, config);
    REQUIRE(!r.refit_applied);
    const auto pred = r.model.predict(d);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        double eta = r.model.glm.intercept;
        for (const auto& enc : r.model.encodings) {
            const auto g = enc.group_indices(d.column(enc.feature()));
            const auto& fc = r.clusters.at(enc.feature());
            eta += fc.coefficients[fc.cluster_of_level[g[i]]];
        }
        CHECK(pred[i] == doctest::Approx(eta).epsilon(1e-12));
    }
    for (const auto& fc : r.clusters.features) CHECK(fc.coefficients[0] == 0.0);
}

TEST_CASE("baseline equivalences") {
    Rng rng(37);
    std::vector<std::string> labels;
    std::vector<double> x, y;
    for (int i = 0; i < 800; ++i) {
        const int k = static_cast<int>(rng() % 15);
        labels.push_back("k" + std::to_string(k));
        x.push_back(static_cast<double>(rng() % 50));
        y.push_back(k % 3 + (x.back() > 25 ? 2.0 : 0.0) + std::normal_distribution<double>(0, 1)(rng));
    }
    R2vfConfig config;
    SUBCASE("nominal only: ordinary lasso on the one-hot design") {
        const auto d = table({nominal("k", labels)}, y);
        const std::vector<FeatureSpec> specs{make_spec("k", FeatureKind::nominal, config)};
        const auto olvf = fit_olvf(d, specs, config);
        const auto split = carve_validation(d, config.validation_fraction, config.seed);
        const auto enc = FeatureEncoding::one_hot_categories("k", labels, select_reference(specs[0], split.train.column("k").labels));
        const std::vector<FeatureEncoding> encs{enc};
        const auto tr = encode_design(encs, split.train);
        const auto va = encode_design(encs, split.valid);
        const auto pen = PenaltySpec::uniform(tr.cols(), 1);
        const auto grid = lambda_grid(tr, split.train.target, Family::gaussian, pen);
        const auto ref = lambda_search(tr, split.train.target, va, split.valid.target, Family::gaussian, pen, grid);
        CHECK(olvf.model.glm.coefficients == ref.model.coefficients);
        CHECK(olvf.model.glm.intercept == ref.model.intercept);
    }
    SUBCASE("numeric only: the fusion step") {
        const auto d = table({numeric("x", x)}, y);
        const std::vector<FeatureSpec> specs{make_spec("x", FeatureKind::numeric, config)};
        config.refit = false;
        const auto olvf = fit_olvf(d, specs, config);
        const auto r2 = run_r2vf(d, specs, config);
        CHECK(olvf.model.glm.coefficients == r2.model.glm.coefficients);
        CHECK(olvf.model.glm.intercept == r2.model.glm.intercept);
    }
    SUBCASE("unregularized uses every initial level") {
        const auto d = table({nominal("k", labels), numeric("x", x)}, y);
        const std::vector<FeatureSpec> specs{make_spec("k", FeatureKind::nominal, config),
                                             make_spec("x", FeatureKind::numeric, config)};
        const auto none = fit_unregularized(d, specs, config);
        CHECK(none.model.glm.coefficients.size() == 14 + 29);
        CHECK(none.model.glm.lambda == 0.0);
    }
}

TEST_CASE("reference policies") {
    const auto d = table({nominal("c", {"a", "a", "a", "b", "c", "c"})}, {0, 0, 0, 5, 9, 9});
    R2vfConfig config;
    const std::vector<FeatureSpec> specs{make_spec("c", FeatureKind::nominal, config)};
    CHECK(std::get<CategoryLevels>(initial_encodings(d, specs, config).encodings[0].levels()).categories.size() == 3);
    CHECK(initial_encodings(d, specs, config).encodings[0].group_labels()[initial_encodings(d, specs, config).encodings[0].reference()] == "a");
    config.nominal_reference = ReferencePolicy::target_mean;
    const auto enc = initial_encodings(d, specs, config).encodings[0];
    CHECK(enc.group_labels()[enc.reference()] == "b");
}

TEST_CASE("pipeline input errors") {
    const auto& src = city_data();
    R2vfConfig config;
    const auto specs = synthetic_specs(config);
    config.family = Family::binomial;
    try {
        run_r2vf(src, specs, config);
        FAIL("expected an input error");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("0/1") != std::string::npos);
    }
    const std::vector<FeatureSpec> wrong{FeatureSpec("city", FeatureKind::numeric, 30, 10)};
    CHECK_THROWS_AS(run_r2vf(src, wrong, R2vfConfig{}), InputError);
    CHECK_THROWS_AS(run_r2vf(src, {}, R2vfConfig{}), InputError);
}
