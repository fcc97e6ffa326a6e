#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "r2vf/pipeline.hpp"
#include "r2vf/table.hpp"

namespace r2vf {

struct SynthConfig {
    std::size_t n_rows = 10000;
    int n_professions = 100;
    double noise_sd = 10.0;
    std::uint64_t seed = 1;

    void validate() const;
};

/// City/age/profession table with a known additive target:
///   city groups {a}=0 {b,c,d}=+15 {e..l}=+17 {m..p}=-12 {q..v}=-14 {w,x}=+10 {y,z}=-10,
///   age term -2|age - 45|, profession effect keyed on the last digit of "P<i>",
///   plus N(0, noise_sd) noise.
/// City k (a=1) is drawn with weight k; each city has its own mean age in
/// [34, 46] and ages spread with sd 13. Professions follow a Zipf-like
/// popularity over a seeded permutation, tilted toward a city- and
/// age-dependent mode.
Dataset generate(const SynthConfig& config);

double city_effect(std::string_view city);
double profession_effect(std::string_view profession);
double age_effect(double age);

/// city and profession nominal, age numeric.
std::vector<FeatureSpec> synthetic_specs(const R2vfConfig& config);

/// `<column> <op> <number>` with op in {>, >=, <, <=, ==, !=}.
struct Threshold {
    enum class Op { gt, ge, lt, le, eq, ne };
    std::string column;
    Op op = Op::gt;
    double value = 0.0;

    bool holds(double x) const;
    /// nullopt when `text` contains no comparison operator; throws on a malformed one.
    static std::optional<Threshold> parse(std::string_view text);
};

/// A plain column name, or a threshold expression yielding a 0/1 target.
struct TargetSpec {
    std::string column;
    std::optional<Threshold> threshold;

    static TargetSpec parse(std::string_view text);
};

/// RFC-4180 style rows; the first row is the header.
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in);
std::string csv_escape(std::string_view field);

/// Typed table with one column per spec. Without a target the result has a
/// zero-filled target of the right length.
Dataset read_csv(std::istream& in, std::span<const FeatureSpec> specs, const std::optional<TargetSpec>& target);
Dataset load_csv(const std::string& path, std::span<const FeatureSpec> specs, const std::optional<TargetSpec>& target);

void write_csv(const Dataset& data, std::ostream& out);

/// Distinct values of a raw CSV column, as text.
std::size_t count_unique(const std::string& path, const std::string& column);

}  // namespace r2vf
