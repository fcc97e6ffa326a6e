#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "r2vf/encoding.hpp"

namespace r2vf {

enum class Family { gaussian, binomial };
enum class PenaltyKind { l1, l2, none };

std::string_view to_string(Family family);
Family parse_family(std::string_view text);
std::string_view to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(std::string_view text);

/// Per-column penalty kinds and the global lambda. The intercept is implicit and
/// never penalized. l1 contributes lambda*|b|, l2 contributes lambda*b^2/2.
struct PenaltySpec {
    std::vector<PenaltyKind> kinds;
    double lambda = 0.0;

    /// alpha = 1 puts l1 on every column, alpha = 2 puts l2 on every column.
    static PenaltySpec uniform(std::size_t columns, int alpha, double lambda = 0.0);
    static PenaltySpec unpenalized(std::size_t columns);

    PenaltySpec with_lambda(double value) const;
    bool any_penalized() const;
    void validate(std::size_t columns) const;
};

struct FitOptions {
    double tol = 1e-7;                 // on the max absolute coefficient change
    int max_sweeps = 10000;            // Gaussian
    int max_irls = 100;                // binomial outer iterations
    int max_inner_sweeps = 1000;       // binomial, per IRLS iteration
    double weight_floor = 1e-8;        // IRLS working weights
    std::size_t polish_limit = 2048;   // exact active-set solve up to this many active columns; 0 disables
    std::size_t gram_limit = 4096;     // Gram-column gradient updates up to this many columns
    /// Called after every coordinate-descent sweep with the penalized objective (Gaussian fits only).
    std::function<void(int sweep, double objective)> on_sweep;
};

struct GlmModel {
    Family family = Family::gaussian;
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<FeatureBlock> blocks;
    double lambda = 0.0;

    std::size_t nonzero_count() const;
};

/// Thrown when a fit exhausts its iteration budget; carries the last iterate.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, GlmModel last)
        : std::runtime_error(what), last_(std::move(last)) {}
    const GlmModel& last_iterate() const { return last_; }

private:
    GlmModel last_;
};

/// Penalized GLM by cyclic coordinate descent with exact soft-thresholding,
/// an IRLS outer loop for the binomial family, and an exact solve on the
/// active set once coordinate descent has converged.
GlmModel fit(const EncodedDesign& design, std::span<const double> target, Family family,
             const PenaltySpec& penalty, const GlmModel* warm_start = nullptr, const FitOptions& options = {});
GlmModel fit(const BinaryMatrix& x, std::span<const double> target, Family family, const PenaltySpec& penalty,
             const GlmModel* warm_start = nullptr, const FitOptions& options = {});

/// Smallest lambda that zeroes every penalized column, from the intercept-only residual.
double lambda_max(const BinaryMatrix& x, std::span<const double> target, Family family, const PenaltySpec& penalty);

/// Log-spaced grid from lambda_max down to lambda_max * ratio.
std::vector<double> lambda_grid(const EncodedDesign& design, std::span<const double> target, Family family,
                                const PenaltySpec& penalty, int grid_size = 100, double ratio = 1e-4);

struct FitReport {
    std::vector<double> lambdas;
    std::vector<double> validation_loss;
    double chosen_lambda = 0.0;
    std::size_t nonzero_count = 0;
    double train_loss = 0.0;
    double validation_loss_at_chosen = 0.0;
};

struct SearchResult {
    GlmModel model;
    FitReport report;
};

/// Warm-started path over `grid` (descending); keeps the model with the lowest
/// validation loss, preferring the larger lambda on exact ties.
SearchResult lambda_search(const EncodedDesign& train, std::span<const double> train_target,
                           const EncodedDesign& valid, std::span<const double> valid_target, Family family,
                           const PenaltySpec& penalty, std::span<const double> grid, const FitOptions& options = {});

std::vector<double> linear_predictor(const GlmModel& model, const BinaryMatrix& x);
std::vector<double> predict(const GlmModel& model, const EncodedDesign& design);

enum class MetricKind { rmse, log_loss };
std::string_view to_string(MetricKind kind);

struct Metric {
    MetricKind kind;
    double value;
};

double rmse(std::span<const double> predictions, std::span<const double> target);
/// Probabilities clipped to [1e-12, 1 - 1e-12].
double log_loss(std::span<const double> probabilities, std::span<const double> target);
Metric metrics(std::span<const double> predictions, std::span<const double> target, Family family);

// Diagnostics shared by the solver and its tests.

/// Gaussian: sum r^2 / (2N). Binomial: negative mean log-likelihood.
double mean_loss(const BinaryMatrix& x, std::span<const double> target, Family family, double intercept,
                 std::span<const double> beta);
double penalized_objective(const BinaryMatrix& x, std::span<const double> target, Family family,
                           const PenaltySpec& penalty, double intercept, std::span<const double> beta);
/// Derivative of mean_loss with respect to each column coefficient.
std::vector<double> loss_gradient(const BinaryMatrix& x, std::span<const double> target, Family family,
                                  double intercept, std::span<const double> beta);

}  // namespace r2vf
