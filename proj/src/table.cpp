#include "r2vf/table.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "r2vf/error.hpp"
#include "r2vf/format.hpp"

namespace r2vf {

std::optional<double> parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

const Column& Dataset::column(const std::string& name) const {
    for (const auto& c : columns)
        if (c.name == name) return c;
    throw InputError("missing column '" + name + "'");
}

bool Dataset::has_column(const std::string& name) const {
    return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.target_name = target_name;
    out.columns.reserve(columns.size());
    for (const auto& c : columns) {
        Column sub{c.name, c.kind, {}, {}};
        if (c.categorical()) {
            sub.labels.reserve(rows.size());
            for (auto r : rows) sub.labels.push_back(c.labels.at(r));
        } else {
            sub.numbers.reserve(rows.size());
            for (auto r : rows) sub.numbers.push_back(c.numbers.at(r));
        }
        out.columns.push_back(std::move(sub));
    }
    out.target.reserve(rows.size());
    out.row_ids.reserve(rows.size());
    for (auto r : rows) {
        out.target.push_back(target.at(r));
        out.row_ids.push_back(row_ids.empty() ? r : row_ids.at(r));
    }
    return out;
}

void Dataset::validate() const {
    for (const auto& c : columns)
        if (c.size() != rows())
            throw InputError("column '" + c.name + "' has " + std::to_string(c.size()) + " rows, target has " +
                             std::to_string(rows()));
    if (!row_ids.empty() && row_ids.size() != rows()) throw InputError("row id count does not match row count");
    for (double t : target)
        if (!std::isfinite(t)) throw InputError("target contains non-finite values");
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

RowSplit random_split(std::size_t n, double second_fraction, std::uint64_t seed) {
    if (!(second_fraction > 0.0 && second_fraction < 1.0))
        throw InputError("split fraction must lie strictly between 0 and 1");
    const auto idx = shuffled_indices(n, seed);
    const auto n_second = static_cast<std::size_t>(std::llround(static_cast<double>(n) * second_fraction));
    RowSplit split;
    split.second.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_second));
    split.first.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_second), idx.end());
    std::sort(split.first.begin(), split.first.end());
    std::sort(split.second.begin(), split.second.end());
    return split;
}

}  // namespace r2vf
