#include "r2vf/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "r2vf/error.hpp"

namespace r2vf {

namespace {

template <typename T>
T get(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

Json to_json(const FeatureSpec& spec) {
    return {{"name", spec.name()},
            {"kind", std::string(to_string(spec.kind()))},
            {"max_bins", spec.max_bins()},
            {"min_obs_per_bin", spec.min_obs_per_bin()}};
}

FeatureSpec spec_from_json(const Json& j) {
    return FeatureSpec(get<std::string>(j, "name"), parse_feature_kind(get<std::string>(j, "kind")),
                       get<int>(j, "max_bins"), get<int>(j, "min_obs_per_bin"));
}

Json to_json(const BinningScheme& scheme) { return {{"feature", scheme.feature}, {"edges", scheme.edges}}; }

BinningScheme scheme_from_json(const Json& j) {
    BinningScheme s{get<std::string>(j, "feature"), get<std::vector<double>>(j, "edges")};
    for (std::size_t i = 1; i < s.edges.size(); ++i)
        if (!(s.edges[i - 1] < s.edges[i])) throw InputError("bin edges of '" + s.feature + "' are not increasing");
    return s;
}

Json to_json(const FeatureEncoding& encoding) {
    Json levels = std::visit(
        [](const auto& l) -> Json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BinLevels>) {
                return {{"type", "bins"}, {"scheme", to_json(l.scheme)}};
            } else if constexpr (std::is_same_v<T, CategoryLevels>) {
                return {{"type", "categories"}, {"categories", l.categories}, {"fallback", l.fallback}};
            } else {
                return {{"type", "scores"},
                        {"scores", l.scores},
                        {"fallback_score", l.fallback_score},
                        {"scheme", to_json(l.scheme)}};
            }
        },
        encoding.levels());
    return {{"feature", encoding.feature()},
            {"kind", std::string(to_string(encoding.kind()))},
            {"coding", std::string(to_string(encoding.coding()))},
            {"reference", encoding.reference()},
            {"group_of_level", encoding.group_of_level()},
            {"levels", std::move(levels)}};
}

FeatureEncoding encoding_from_json(const Json& j) {
    const auto& lj = j.at("levels");
    const auto type = get<std::string>(lj, "type");
    LevelMap levels;
    if (type == "bins") {
        levels = BinLevels{scheme_from_json(lj.at("scheme"))};
    } else if (type == "categories") {
        CategoryLevels c{get<std::vector<std::string>>(lj, "categories"), get<std::size_t>(lj, "fallback")};
        if (c.fallback >= c.categories.size()) throw InputError("category fallback out of range");
        levels = std::move(c);
    } else if (type == "scores") {
        levels = ScoreLevels{get<std::map<std::string, double>>(lj, "scores"), get<double>(lj, "fallback_score"),
                             scheme_from_json(lj.at("scheme"))};
    } else {
        throw InputError("unknown level map type '" + type + "'");
    }
    return FeatureEncoding(get<std::string>(j, "feature"), parse_feature_kind(get<std::string>(j, "kind")),
                           std::move(levels), get<std::vector<std::size_t>>(j, "group_of_level"),
                           parse_coding(get<std::string>(j, "coding")), get<std::size_t>(j, "reference"));
}

Json to_json(const FeatureBlock& block) {
    return {{"feature", block.feature},
            {"coding", std::string(to_string(block.coding))},
            {"levels", block.levels},
            {"reference", block.reference},
            {"first_column", block.first_column},
            {"members", block.members}};
}

FeatureBlock block_from_json(const Json& j) {
    FeatureBlock b;
    b.feature = get<std::string>(j, "feature");
    b.coding = parse_coding(get<std::string>(j, "coding"));
    b.levels = get<std::vector<std::string>>(j, "levels");
    b.reference = get<std::size_t>(j, "reference");
    b.first_column = get<std::size_t>(j, "first_column");
    b.members = get<std::vector<std::vector<std::string>>>(j, "members");
    return b;
}

Json to_json(const GlmModel& model) {
    Json blocks = Json::array();
    for (const auto& b : model.blocks) blocks.push_back(to_json(b));
    return {{"family", std::string(to_string(model.family))},
            {"link", model.family == Family::binomial ? "logit" : "identity"},
            {"intercept", model.intercept},
            {"coefficients", model.coefficients},
            {"lambda", model.lambda},
            {"blocks", std::move(blocks)}};
}

GlmModel glm_from_json(const Json& j) {
    GlmModel m;
    m.family = parse_family(get<std::string>(j, "family"));
    m.intercept = get<double>(j, "intercept");
    m.coefficients = get<std::vector<double>>(j, "coefficients");
    m.lambda = get<double>(j, "lambda");
    std::size_t columns = 0;
    for (const auto& b : j.at("blocks")) {
        m.blocks.push_back(block_from_json(b));
        columns += m.blocks.back().column_count();
    }
    if (!m.blocks.empty() && columns != m.coefficients.size())
        throw InputError("model blocks cover " + std::to_string(columns) + " columns but there are " +
                         std::to_string(m.coefficients.size()) + " coefficients");
    return m;
}

Json to_json(const R2vfModel& model) {
    Json specs = Json::array();
    for (const auto& s : model.specs) specs.push_back(to_json(s));
    Json encodings = Json::array();
    for (const auto& e : model.encodings) encodings.push_back(to_json(e));
    return {{"format", "r2vf-model"},
            {"version", 1},
            {"specs", std::move(specs)},
            {"encodings", std::move(encodings)},
            {"glm", to_json(model.glm)}};
}

R2vfModel model_from_json(const Json& j) {
    if (!j.is_object() || j.value("format", std::string()) != "r2vf-model")
        throw InputError("not an r2vf model document");
    R2vfModel m;
    for (const auto& s : j.at("specs")) m.specs.push_back(spec_from_json(s));
    for (const auto& e : j.at("encodings")) m.encodings.push_back(encoding_from_json(e));
    m.glm = glm_from_json(j.at("glm"));
    return m;
}

Json to_json(const ClusterMap& clusters) {
    Json out = Json::object();
    for (const auto& f : clusters.features) {
        Json list = Json::array();
        for (std::size_t c = 0; c < f.cluster_count(); ++c)
            list.push_back({{"levels", f.members[c]}, {"coefficient", f.coefficients[c]}});
        out[f.feature] = std::move(list);
    }
    return out;
}

ClusterMap cluster_map_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("cluster map must be an object");
    ClusterMap map;
    for (const auto& [feature, list] : j.items()) {
        FeatureClusters f;
        f.feature = feature;
        for (const auto& entry : list) {
            const std::size_t c = f.coefficients.size();
            f.members.push_back(get<std::vector<std::string>>(entry, "levels"));
            f.coefficients.push_back(get<double>(entry, "coefficient"));
            for (const auto& level : f.members.back()) {
                f.levels.push_back(level);
                f.cluster_of_level.push_back(c);
            }
        }
        map.features.push_back(std::move(f));
    }
    return map;
}

Json to_json(const FitReport& report) {
    return {{"lambdas", report.lambdas},
            {"validation_loss", report.validation_loss},
            {"chosen_lambda", report.chosen_lambda},
            {"nonzero_count", report.nonzero_count},
            {"train_loss", report.train_loss},
            {"validation_loss_at_chosen", report.validation_loss_at_chosen}};
}

FitReport report_from_json(const Json& j) {
    FitReport r;
    r.lambdas = get<std::vector<double>>(j, "lambdas");
    r.validation_loss = get<std::vector<double>>(j, "validation_loss");
    r.chosen_lambda = get<double>(j, "chosen_lambda");
    r.nonzero_count = get<std::size_t>(j, "nonzero_count");
    r.train_loss = get<double>(j, "train_loss");
    r.validation_loss_at_chosen = get<double>(j, "validation_loss_at_chosen");
    return r;
}

Json to_json(const Ranking& ranking) {
    Json out = Json::object();
    for (const auto& [feature, scores] : ranking.scores) out[feature] = scores;
    return out;
}

Json to_json(const R2vfConfig& c) {
    return {{"n", c.n},
            {"m", c.m},
            {"ranking_penalty", std::string(to_string(c.ranking_penalty))},
            {"refit", c.refit},
            {"grid_size", c.grid_size},
            {"grid_ratio", c.grid_ratio},
            {"validation_fraction", c.validation_fraction},
            {"min_obs_per_bin", c.min_obs_per_bin},
            {"seed", c.seed},
            {"nominal_reference", std::string(to_string(c.nominal_reference))},
            {"family", std::string(to_string(c.family))},
            {"solver",
             {{"tol", c.solver.tol},
              {"max_sweeps", c.solver.max_sweeps},
              {"max_irls", c.solver.max_irls},
              {"max_inner_sweeps", c.solver.max_inner_sweeps},
              {"weight_floor", c.solver.weight_floor},
              {"polish_limit", c.solver.polish_limit},
              {"gram_limit", c.solver.gram_limit}}}};
}

R2vfConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw InputError("config must be an object");
    static const std::set<std::string> known = {"n",    "m",         "ranking_penalty", "refit", "grid_size",
                                                "grid_ratio", "validation_fraction", "min_obs_per_bin", "seed",
                                                "nominal_reference", "family", "solver"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw InputError("unknown config field '" + key + "'");
    R2vfConfig c;
    if (j.contains("n")) c.n = get<int>(j, "n");
    if (j.contains("m")) c.m = get<int>(j, "m");
    if (j.contains("ranking_penalty")) c.ranking_penalty = parse_ranking_penalty(get<std::string>(j, "ranking_penalty"));
    if (j.contains("refit")) c.refit = get<bool>(j, "refit");
    if (j.contains("grid_size")) c.grid_size = get<int>(j, "grid_size");
    if (j.contains("grid_ratio")) c.grid_ratio = get<double>(j, "grid_ratio");
    if (j.contains("validation_fraction")) c.validation_fraction = get<double>(j, "validation_fraction");
    if (j.contains("min_obs_per_bin")) c.min_obs_per_bin = get<int>(j, "min_obs_per_bin");
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("nominal_reference"))
        c.nominal_reference = parse_reference_policy(get<std::string>(j, "nominal_reference"));
    if (j.contains("family")) c.family = parse_family(get<std::string>(j, "family"));
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        if (s.contains("tol")) c.solver.tol = get<double>(s, "tol");
        if (s.contains("max_sweeps")) c.solver.max_sweeps = get<int>(s, "max_sweeps");
        if (s.contains("max_irls")) c.solver.max_irls = get<int>(s, "max_irls");
        if (s.contains("max_inner_sweeps")) c.solver.max_inner_sweeps = get<int>(s, "max_inner_sweeps");
        if (s.contains("weight_floor")) c.solver.weight_floor = get<double>(s, "weight_floor");
        if (s.contains("polish_limit")) c.solver.polish_limit = get<std::size_t>(s, "polish_limit");
        if (s.contains("gram_limit")) c.solver.gram_limit = get<std::size_t>(s, "gram_limit");
    }
    c.validate();
    return c;
}

std::vector<FeatureSpec> specs_from_json(const Json& j, const R2vfConfig& config) {
    if (!j.is_object() || !j.contains("features") || !j.at("features").is_array())
        throw InputError("feature spec must be an object with a 'features' array");
    std::vector<FeatureSpec> specs;
    std::set<std::string> seen;
    for (const auto& f : j.at("features")) {
        const auto name = get<std::string>(f, "name");
        if (!seen.insert(name).second) throw InputError("feature '" + name + "' listed twice");
        const auto kind = parse_feature_kind(get<std::string>(f, "kind"));
        const auto base = make_spec(name, kind, config);
        const int max_bins = f.contains("max_bins") ? get<int>(f, "max_bins") : base.max_bins();
        const int min_obs = f.contains("min_obs_per_bin") ? get<int>(f, "min_obs_per_bin") : base.min_obs_per_bin();
        specs.emplace_back(name, kind, max_bins, min_obs);
    }
    if (specs.empty()) throw InputError("feature spec lists no features");
    return specs;
}

Json specs_to_json(const std::vector<FeatureSpec>& specs) {
    Json list = Json::array();
    for (const auto& s : specs) list.push_back(to_json(s));
    return {{"features", std::move(list)}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace r2vf
