#pragma once

#include <stdexcept>
#include <string>

namespace r2vf {

/// Malformed or inconsistent caller input (shape mismatch, bad target, bad flag value).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A feature that cannot be split into at least two bins (constant column, or too
/// few observations for the per-bin minimum). Callers drop the feature.
class DegenerateFeatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The target carries no signal to build a lambda grid from.
class DegenerateGridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unpenalized cluster design without full column rank.
class RankDeficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace r2vf
