#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "r2vf/feature_spec.hpp"

namespace r2vf {

/// One typed input column. Nominal features carry labels; numeric and ordinal
/// features carry numbers (ordinal levels are their numeric codes).
struct Column {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    std::vector<double> numbers;
    std::vector<std::string> labels;

    bool categorical() const { return kind == FeatureKind::nominal; }
    std::size_t size() const { return categorical() ? labels.size() : numbers.size(); }
};

/// Feature columns plus the response. `row_ids` tracks original row numbers
/// through subsetting so splits can be audited.
struct Dataset {
    std::vector<Column> columns;
    std::vector<double> target;
    std::string target_name = "target";
    std::vector<std::size_t> row_ids;

    std::size_t rows() const { return target.size(); }
    const Column& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
    Dataset subset(std::span<const std::size_t> rows) const;
    void validate() const;
};

/// Reorders the raw row indices [0, n) with a seeded shuffle.
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

struct RowSplit {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};

/// Seeded random partition of [0, n) with round(n * second_fraction) rows in `second`.
RowSplit random_split(std::size_t n, double second_fraction, std::uint64_t seed);

}  // namespace r2vf
