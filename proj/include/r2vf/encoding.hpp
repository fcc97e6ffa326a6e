#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "r2vf/feature_spec.hpp"
#include "r2vf/table.hpp"

namespace r2vf {

/// Left edges of the non-reference bins of an ordered feature. Bin 0 holds
/// everything below edges[0]; bin i (i >= 1) is [edges[i-1], edges[i]).
/// Values above the training range fall in the top bin.
struct BinningScheme {
    std::string feature;
    std::vector<double> edges;

    std::size_t bin_count() const { return edges.size() + 1; }
    std::size_t bin_of(double value) const;
    std::string bin_label(std::size_t bin) const;
};

/// Percentile bins with at most `max_bins` bins and at least `min_obs`
/// observations per bin. When the column has no more distinct values than
/// `max_bins`, every distinct value starts its own bin; otherwise candidate
/// edges sit at the k/max_bins empirical quantiles. Under-filled bins are then
/// merged greedily left to right. Throws DegenerateFeatureError when fewer
/// than two bins survive.
BinningScheme build_percentile_bins(std::span<const double> values, int max_bins, int min_obs,
                                    std::string feature = {});

/// 0/1 matrix stored as sorted row indices of the ones in each column, with the
/// transposed (per-row) pattern kept alongside for row-wise passes.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::vector<std::vector<std::uint32_t>> columns);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return col_rows_.size(); }
    std::size_t nonzeros() const { return nnz_; }

    bool operator()(std::size_t row, std::size_t col) const;
    std::span<const std::uint32_t> column(std::size_t col) const { return col_rows_[col]; }
    std::span<const std::uint32_t> row(std::size_t r) const {
        return {row_cols_.data() + row_start_[r], row_cols_.data() + row_start_[r + 1]};
    }

    /// Row r as maximal runs of consecutive set columns, [first, last] inclusive.
    struct Run {
        std::uint32_t first;
        std::uint32_t last;
    };
    std::span<const Run> row_runs(std::size_t r) const {
        return {runs_.data() + run_start_[r], runs_.data() + run_start_[r + 1]};
    }

    static BinaryMatrix hstack(std::span<const BinaryMatrix> parts);

private:
    std::size_t rows_ = 0;
    std::size_t nnz_ = 0;
    std::vector<std::vector<std::uint32_t>> col_rows_;
    std::vector<std::size_t> row_start_{0};
    std::vector<std::uint32_t> row_cols_;
    std::vector<std::size_t> run_start_{0};
    std::vector<Run> runs_;
};

enum class Coding { one_hot, split };

std::string_view to_string(Coding coding);
Coding parse_coding(std::string_view text);

/// Ties a contiguous run of design columns back to its feature. `levels` lists
/// every level in order, including the reference, which has no column. For a
/// split block the reference is level 0 and column k stands for level k + 1.
/// `members` names what each level covers (a bin range, a category, or the
/// categories grouped into one score bin).
struct FeatureBlock {
    std::string feature;
    Coding coding = Coding::one_hot;
    std::vector<std::string> levels;
    std::size_t reference = 0;
    std::size_t first_column = 0;
    std::vector<std::vector<std::string>> members;

    std::size_t column_count() const { return levels.empty() ? 0 : levels.size() - 1; }
    /// Level represented by block-local column `k`.
    std::size_t level_of_column(std::size_t k) const;
    const std::string& reference_label() const { return levels.at(reference); }
};

struct DesignBlock {
    FeatureBlock meta;
    BinaryMatrix columns;
    std::size_t unseen = 0;  // predict-time values with no training level
};

/// One column per non-reference level of the training column.
DesignBlock one_hot_encode(std::span<const std::string> column, const std::string& reference);
/// Same, against a fixed training level set; unseen labels give an all-zero row.
DesignBlock one_hot_encode(std::span<const std::string> column,
                           std::span<const std::string> levels, const std::string& reference);
/// Cumulative indicators b_i = 1 iff value >= edges[i].
DesignBlock split_code(std::span<const double> values, const BinningScheme& scheme);

/// Generic builders over level indices.
BinaryMatrix one_hot_columns(std::span<const std::size_t> level, std::size_t n_levels,
                             std::size_t reference);
BinaryMatrix split_columns(std::span<const std::size_t> level, std::size_t n_levels);

/// Most frequent label; ties go to the lexicographically smallest.
std::string select_reference(const FeatureSpec& feature, std::span<const std::string> column);
/// Ordered features always use their lowest bin.
std::string select_reference(const FeatureSpec& feature, const BinningScheme& scheme);
/// Label whose target mean is closest to the overall mean (ties lexicographic).
std::string select_reference_by_target_mean(std::span<const std::string> column,
                                            std::span<const double> target);

/// beta_i = sum_{s <= i} delta_s.
std::vector<double> back_transform(std::span<const double> deltas);
/// delta_i = beta_i - beta_{i-1} with beta_0 = 0.
std::vector<double> forward_difference(std::span<const double> betas);

struct BinLevels {
    BinningScheme scheme;
};
struct CategoryLevels {
    std::vector<std::string> categories;  // sorted
    std::size_t fallback = 0;             // level assigned to unseen labels
};
/// Category -> score -> bin over the score axis.
struct ScoreLevels {
    std::map<std::string, double> scores;
    double fallback_score = 0.0;
    BinningScheme scheme;
};
using LevelMap = std::variant<BinLevels, CategoryLevels, ScoreLevels>;

/// Fitted per-feature encoder: raw cell -> level -> (optional) group -> design
/// columns. Groups let cluster-level refits reuse the level machinery.
class FeatureEncoding {
public:
    static FeatureEncoding split_bins(std::string feature, FeatureKind kind, BinningScheme scheme);
    static FeatureEncoding one_hot_bins(std::string feature, FeatureKind kind, BinningScheme scheme);
    static FeatureEncoding one_hot_categories(std::string feature, std::vector<std::string> categories,
                                              const std::string& reference);
    static FeatureEncoding ranked_split(std::string feature, std::map<std::string, double> scores,
                                        BinningScheme scheme);
    /// Re-groups the levels of `base`; groups must be numbered 0..G-1.
    static FeatureEncoding grouped(const FeatureEncoding& base, std::vector<std::size_t> group_of_level,
                                   Coding coding, std::size_t reference_group);

    const std::string& feature() const { return feature_; }
    FeatureKind kind() const { return kind_; }
    Coding coding() const { return coding_; }
    const LevelMap& levels() const { return levels_; }
    const std::vector<std::size_t>& group_of_level() const { return group_of_level_; }
    std::size_t reference() const { return reference_; }

    std::size_t level_count() const;
    std::size_t group_count() const { return labels_.size(); }
    const std::vector<std::string>& group_labels() const { return labels_; }
    const std::vector<std::vector<std::string>>& group_members() const { return members_; }

    /// Level index of every row; counts labels never seen in training.
    std::vector<std::size_t> level_indices(const Column& column, std::size_t* unseen = nullptr) const;
    std::vector<std::size_t> group_indices(const Column& column, std::size_t* unseen = nullptr) const;
    DesignBlock encode(const Column& column) const;

    // Raw construction for deserialization.
    FeatureEncoding(std::string feature, FeatureKind kind, LevelMap levels,
                    std::vector<std::size_t> group_of_level, Coding coding, std::size_t reference);

private:
    void build_labels();
    std::size_t group_count_from_map() const;

    std::string feature_;
    FeatureKind kind_;
    LevelMap levels_;
    std::vector<std::size_t> group_of_level_;
    Coding coding_;
    std::size_t reference_;
    std::vector<std::string> labels_;
    std::vector<std::vector<std::string>> members_;
};

struct EncodedDesign {
    BinaryMatrix x;
    std::vector<FeatureBlock> blocks;
    std::size_t unseen = 0;

    std::size_t rows() const { return x.rows(); }
    std::size_t cols() const { return x.cols(); }
};

EncodedDesign encode_design(std::span<const FeatureEncoding> encodings, const Dataset& data);

}  // namespace r2vf
