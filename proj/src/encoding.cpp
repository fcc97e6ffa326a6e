#include "r2vf/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "r2vf/error.hpp"
#include "r2vf/format.hpp"

namespace r2vf {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::numeric: return "numeric";
        case FeatureKind::ordinal: return "ordinal";
        case FeatureKind::nominal: return "nominal";
    }
    return "?";
}

FeatureKind parse_feature_kind(std::string_view text) {
    if (text == "numeric") return FeatureKind::numeric;
    if (text == "ordinal") return FeatureKind::ordinal;
    if (text == "nominal") return FeatureKind::nominal;
    throw InputError("unknown feature kind '" + std::string(text) + "' (expected numeric, ordinal or nominal)");
}

FeatureSpec::FeatureSpec(std::string name, FeatureKind kind, int max_bins, int min_obs_per_bin)
    : name_(std::move(name)), kind_(kind), max_bins_(max_bins), min_obs_per_bin_(min_obs_per_bin) {
    if (name_.empty()) throw InputError("feature name must not be empty");
    if (max_bins_ < 2) throw InputError("feature '" + name_ + "': max_bins must be >= 2");
    if (min_obs_per_bin_ < 1) throw InputError("feature '" + name_ + "': min_obs_per_bin must be >= 1");
}

std::string_view to_string(Coding coding) { return coding == Coding::split ? "split" : "one_hot"; }

Coding parse_coding(std::string_view text) {
    if (text == "split") return Coding::split;
    if (text == "one_hot") return Coding::one_hot;
    throw InputError("unknown coding '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// BinaryMatrix

BinaryMatrix::BinaryMatrix(std::size_t rows, std::vector<std::vector<std::uint32_t>> columns)
    : rows_(rows), col_rows_(std::move(columns)) {
    std::vector<std::size_t> per_row(rows_ + 1, 0);
    for (const auto& col : col_rows_) {
        for (std::size_t k = 0; k < col.size(); ++k) {
            if (col[k] >= rows_) throw InputError("binary matrix row index out of range");
            if (k > 0 && col[k] <= col[k - 1]) throw InputError("binary matrix column rows must be strictly increasing");
            ++per_row[col[k] + 1];
        }
        nnz_ += col.size();
    }
    row_start_.assign(rows_ + 1, 0);
    for (std::size_t r = 0; r < rows_; ++r) row_start_[r + 1] = row_start_[r] + per_row[r + 1];
    row_cols_.resize(nnz_);
    std::vector<std::size_t> fill(row_start_.begin(), row_start_.end() - 1);
    for (std::size_t c = 0; c < col_rows_.size(); ++c)
        for (auto r : col_rows_[c]) row_cols_[fill[r]++] = static_cast<std::uint32_t>(c);
    run_start_.assign(rows_ + 1, 0);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (auto c : row(r)) {
            if (runs_.size() > run_start_[r] && runs_.back().last + 1 == c) runs_.back().last = c;
            else runs_.push_back({c, c});
        }
        run_start_[r + 1] = runs_.size();
    }
}

bool BinaryMatrix::operator()(std::size_t row, std::size_t col) const {
    const auto& c = col_rows_.at(col);
    return std::binary_search(c.begin(), c.end(), static_cast<std::uint32_t>(row));
}

BinaryMatrix BinaryMatrix::hstack(std::span<const BinaryMatrix> parts) {
    if (parts.empty()) return {};
    const std::size_t rows = parts.front().rows();
    std::vector<std::vector<std::uint32_t>> cols;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw InputError("hstack: row count mismatch");
        cols.insert(cols.end(), p.col_rows_.begin(), p.col_rows_.end());
    }
    return BinaryMatrix(rows, std::move(cols));
}

// ---------------------------------------------------------------------------
// Blocks

std::size_t FeatureBlock::level_of_column(std::size_t k) const {
    if (coding == Coding::split) return k + 1;
    return k < reference ? k : k + 1;
}

BinaryMatrix one_hot_columns(std::span<const std::size_t> level, std::size_t n_levels, std::size_t reference) {
    std::vector<std::vector<std::uint32_t>> cols(n_levels > 0 ? n_levels - 1 : 0);
    for (std::size_t r = 0; r < level.size(); ++r) {
        const std::size_t l = level[r];
        if (l == reference) continue;
        cols[l < reference ? l : l - 1].push_back(static_cast<std::uint32_t>(r));
    }
    return BinaryMatrix(level.size(), std::move(cols));
}

BinaryMatrix split_columns(std::span<const std::size_t> level, std::size_t n_levels) {
    std::vector<std::vector<std::uint32_t>> cols(n_levels > 0 ? n_levels - 1 : 0);
    for (std::size_t r = 0; r < level.size(); ++r)
        for (std::size_t k = 0; k < level[r]; ++k) cols[k].push_back(static_cast<std::uint32_t>(r));
    return BinaryMatrix(level.size(), std::move(cols));
}

DesignBlock one_hot_encode(std::span<const std::string> column, const std::string& reference) {
    std::set<std::string> seen(column.begin(), column.end());
    std::vector<std::string> levels(seen.begin(), seen.end());
    return one_hot_encode(column, levels, reference);
}

DesignBlock one_hot_encode(std::span<const std::string> column, std::span<const std::string> levels,
                           const std::string& reference) {
    std::vector<std::string> sorted(levels.begin(), levels.end());
    std::sort(sorted.begin(), sorted.end());
    const auto ref = std::lower_bound(sorted.begin(), sorted.end(), reference);
    if (ref == sorted.end() || *ref != reference)
        throw InputError("reference label '" + reference + "' does not occur in the training levels");
    Column col{"", FeatureKind::nominal, {}, std::vector<std::string>(column.begin(), column.end())};
    return FeatureEncoding::one_hot_categories("", std::move(sorted), reference).encode(col);
}

DesignBlock split_code(std::span<const double> values, const BinningScheme& scheme) {
    if (scheme.edges.empty()) throw InputError("split_code: scheme has no edges");
    Column col{scheme.feature, FeatureKind::numeric, std::vector<double>(values.begin(), values.end()), {}};
    return FeatureEncoding::split_bins(scheme.feature, FeatureKind::numeric, scheme).encode(col);
}

// ---------------------------------------------------------------------------
// References and delta parameterization

std::string select_reference(const FeatureSpec& feature, std::span<const std::string> column) {
    if (column.empty()) throw InputError("select_reference: empty column for '" + feature.name() + "'");
    if (feature.ordered()) throw InputError("select_reference: ordered feature '" + feature.name() + "' needs its bins");
    std::map<std::string, std::size_t> freq;
    for (const auto& v : column) ++freq[v];
    // std::map iterates in lexicographic order, so strict > keeps the smallest label on ties.
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

std::string select_reference(const FeatureSpec& feature, const BinningScheme& scheme) {
    if (!feature.ordered()) throw InputError("select_reference: nominal feature '" + feature.name() + "' has no bins");
    return scheme.bin_label(0);
}

std::string select_reference_by_target_mean(std::span<const std::string> column, std::span<const double> target) {
    if (column.empty() || column.size() != target.size())
        throw InputError("select_reference_by_target_mean: column and target must be non-empty and aligned");
    std::map<std::string, std::pair<double, std::size_t>> acc;
    double total = 0.0;
    for (std::size_t i = 0; i < column.size(); ++i) {
        auto& a = acc[column[i]];
        a.first += target[i];
        ++a.second;
        total += target[i];
    }
    const double mean = total / static_cast<double>(column.size());
    auto best = acc.begin();
    double best_gap = std::abs(best->second.first / best->second.second - mean);
    for (auto it = acc.begin(); it != acc.end(); ++it) {
        const double gap = std::abs(it->second.first / it->second.second - mean);
        if (gap < best_gap) {
            best = it;
            best_gap = gap;
        }
    }
    return best->first;
}

std::vector<double> back_transform(std::span<const double> deltas) {
    std::vector<double> betas(deltas.size());
    std::partial_sum(deltas.begin(), deltas.end(), betas.begin());
    return betas;
}

std::vector<double> forward_difference(std::span<const double> betas) {
    std::vector<double> deltas(betas.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        deltas[i] = betas[i] - prev;
        prev = betas[i];
    }
    return deltas;
}

// ---------------------------------------------------------------------------
// FeatureEncoding

namespace {

std::vector<std::size_t> identity_groups(std::size_t n) {
    std::vector<std::size_t> g(n);
    std::iota(g.begin(), g.end(), 0);
    return g;
}

std::size_t level_count_of(const LevelMap& levels) {
    return std::visit(
        [](const auto& l) -> std::size_t {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, CategoryLevels>) return l.categories.size();
            else return l.scheme.bin_count();
        },
        levels);
}

}  // namespace

FeatureEncoding::FeatureEncoding(std::string feature, FeatureKind kind, LevelMap levels,
                                 std::vector<std::size_t> group_of_level, Coding coding, std::size_t reference)
    : feature_(std::move(feature)), kind_(kind), levels_(std::move(levels)),
      group_of_level_(std::move(group_of_level)), coding_(coding), reference_(reference) {
    const std::size_t n_levels = level_count_of(levels_);
    if (group_of_level_.empty()) group_of_level_ = identity_groups(n_levels);
    if (group_of_level_.size() != n_levels)
        throw InputError("feature '" + feature_ + "': group map size does not match level count");
    std::size_t groups = 0;
    for (auto g : group_of_level_) groups = std::max(groups, g + 1);
    std::vector<bool> used(groups, false);
    for (auto g : group_of_level_) used[g] = true;
    if (std::find(used.begin(), used.end(), false) != used.end())
        throw InputError("feature '" + feature_ + "': group indices must be contiguous from 0");
    if (reference_ >= groups) throw InputError("feature '" + feature_ + "': reference group out of range");
    if (coding_ == Coding::split && reference_ != 0)
        throw InputError("feature '" + feature_ + "': split coding requires the lowest level as reference");
    build_labels();
}

void FeatureEncoding::build_labels() {
    const std::size_t n_levels = group_of_level_.size();
    std::vector<std::string> level_labels(n_levels);
    std::vector<std::vector<std::string>> level_members(n_levels);
    std::visit(
        [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BinLevels>) {
                for (std::size_t i = 0; i < n_levels; ++i) {
                    level_labels[i] = l.scheme.bin_label(i);
                    level_members[i] = {level_labels[i]};
                }
            } else if constexpr (std::is_same_v<T, CategoryLevels>) {
                for (std::size_t i = 0; i < n_levels; ++i) {
                    level_labels[i] = l.categories[i];
                    level_members[i] = {l.categories[i]};
                }
            } else {
                for (std::size_t i = 0; i < n_levels; ++i) level_labels[i] = l.scheme.bin_label(i);
                // Members listed in score order, then by name.
                std::vector<std::pair<double, std::string>> by_score;
                for (const auto& [cat, score] : l.scores) by_score.emplace_back(score, cat);
                std::sort(by_score.begin(), by_score.end());
                for (const auto& [score, cat] : by_score) level_members[l.scheme.bin_of(score)].push_back(cat);
            }
        },
        levels_);

    const std::size_t groups = group_count_from_map();
    labels_.assign(groups, {});
    members_.assign(groups, {});
    for (std::size_t i = 0; i < n_levels; ++i) {
        const auto g = group_of_level_[i];
        labels_[g] = labels_[g].empty() ? level_labels[i] : labels_[g] + "|" + level_labels[i];
        members_[g].insert(members_[g].end(), level_members[i].begin(), level_members[i].end());
    }
}

std::size_t FeatureEncoding::group_count_from_map() const {
    std::size_t groups = 0;
    for (auto g : group_of_level_) groups = std::max(groups, g + 1);
    return groups;
}

std::size_t FeatureEncoding::level_count() const { return level_count_of(levels_); }

FeatureEncoding FeatureEncoding::split_bins(std::string feature, FeatureKind kind, BinningScheme scheme) {
    return FeatureEncoding(std::move(feature), kind, BinLevels{std::move(scheme)}, {}, Coding::split, 0);
}

FeatureEncoding FeatureEncoding::one_hot_bins(std::string feature, FeatureKind kind, BinningScheme scheme) {
    return FeatureEncoding(std::move(feature), kind, BinLevels{std::move(scheme)}, {}, Coding::one_hot, 0);
}

FeatureEncoding FeatureEncoding::one_hot_categories(std::string feature, std::vector<std::string> categories,
                                                    const std::string& reference) {
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
    const auto it = std::lower_bound(categories.begin(), categories.end(), reference);
    if (it == categories.end() || *it != reference)
        throw InputError("feature '" + feature + "': reference '" + reference + "' is not a training category");
    const auto ref = static_cast<std::size_t>(it - categories.begin());
    return FeatureEncoding(std::move(feature), FeatureKind::nominal, CategoryLevels{std::move(categories), ref}, {},
                           Coding::one_hot, ref);
}

FeatureEncoding FeatureEncoding::ranked_split(std::string feature, std::map<std::string, double> scores,
                                              BinningScheme scheme) {
    return FeatureEncoding(std::move(feature), FeatureKind::nominal, ScoreLevels{std::move(scores), 0.0, std::move(scheme)},
                           {}, Coding::split, 0);
}

FeatureEncoding FeatureEncoding::grouped(const FeatureEncoding& base, std::vector<std::size_t> group_of_level,
                                         Coding coding, std::size_t reference_group) {
    return FeatureEncoding(base.feature_, base.kind_, base.levels_, std::move(group_of_level), coding, reference_group);
}

std::vector<std::size_t> FeatureEncoding::level_indices(const Column& column, std::size_t* unseen) const {
    std::vector<std::size_t> out(column.size());
    std::size_t missing = 0;
    std::visit(
        [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, BinLevels>) {
                if (column.categorical())
                    throw InputError("feature '" + feature_ + "' expects numeric values");
                for (std::size_t r = 0; r < out.size(); ++r) out[r] = l.scheme.bin_of(column.numbers[r]);
            } else if constexpr (std::is_same_v<T, CategoryLevels>) {
                if (!column.categorical()) throw InputError("feature '" + feature_ + "' expects category labels");
                for (std::size_t r = 0; r < out.size(); ++r) {
                    const auto it = std::lower_bound(l.categories.begin(), l.categories.end(), column.labels[r]);
                    if (it == l.categories.end() || *it != column.labels[r]) {
                        out[r] = l.fallback;
                        ++missing;
                    } else {
                        out[r] = static_cast<std::size_t>(it - l.categories.begin());
                    }
                }
            } else {
                if (!column.categorical()) throw InputError("feature '" + feature_ + "' expects category labels");
                for (std::size_t r = 0; r < out.size(); ++r) {
                    const auto it = l.scores.find(column.labels[r]);
                    double score = l.fallback_score;
                    if (it == l.scores.end()) ++missing;
                    else score = it->second;
                    out[r] = l.scheme.bin_of(score);
                }
            }
        },
        levels_);
    if (unseen) *unseen = missing;
    return out;
}

std::vector<std::size_t> FeatureEncoding::group_indices(const Column& column, std::size_t* unseen) const {
    auto idx = level_indices(column, unseen);
    for (auto& i : idx) i = group_of_level_[i];
    return idx;
}

DesignBlock FeatureEncoding::encode(const Column& column) const {
    std::size_t unseen = 0;
    const auto groups = group_indices(column, &unseen);
    DesignBlock block;
    block.meta.feature = feature_;
    block.meta.coding = coding_;
    block.meta.levels = labels_;
    block.meta.members = members_;
    block.meta.reference = reference_;
    block.columns = coding_ == Coding::split ? split_columns(groups, group_count())
                                             : one_hot_columns(groups, group_count(), reference_);
    block.unseen = unseen;
    return block;
}

EncodedDesign encode_design(std::span<const FeatureEncoding> encodings, const Dataset& data) {
    EncodedDesign design;
    std::vector<BinaryMatrix> parts;
    std::size_t next = 0;
    for (const auto& enc : encodings) {
        auto block = enc.encode(data.column(enc.feature()));
        block.meta.first_column = next;
        next += block.columns.cols();
        design.unseen += block.unseen;
        design.blocks.push_back(std::move(block.meta));
        parts.push_back(std::move(block.columns));
    }
    design.x = parts.empty() ? BinaryMatrix(data.rows(), {}) : BinaryMatrix::hstack(parts);
    return design;
}

}  // namespace r2vf
