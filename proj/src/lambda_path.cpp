#include <algorithm>
#include <cmath>
#include <limits>

#include "r2vf/error.hpp"
#include "r2vf/glm.hpp"

namespace r2vf {

double lambda_max(const BinaryMatrix& x, std::span<const double> target, Family family, const PenaltySpec& penalty) {
    if (x.rows() != target.size() || target.empty()) throw InputError("lambda_max: design/target size mismatch");
    penalty.validate(x.cols());
    if (!penalty.any_penalized()) throw InputError("lambda_max: no penalized columns");
    double mean = 0.0;
    for (double t : target) mean += t;
    mean /= static_cast<double>(target.size());
    // Binomial intercept-only fit has p = mean, so both families share y - mean.
    bool constant = true;
    for (double t : target) constant = constant && t == target.front();
    if (constant) throw DegenerateGridError("target is constant; no lambda grid exists");
    (void)family;

    double best = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        if (penalty.kinds[j] == PenaltyKind::none) continue;
        double s = 0.0;
        for (auto i : x.column(j)) s += target[i] - mean;
        best = std::max(best, std::abs(s));
    }
    best /= static_cast<double>(target.size());
    if (!(best > 0.0) || !std::isfinite(best))
        throw DegenerateGridError("no penalized column correlates with the target; lambda_max is zero");
    // Nudged up so rounding in the solver's gradients cannot leave a residue at the top.
    return best * (1.0 + 1e-12);
}

std::vector<double> lambda_grid(const EncodedDesign& design, std::span<const double> target, Family family,
                                const PenaltySpec& penalty, int grid_size, double ratio) {
    if (grid_size < 2) throw InputError("grid size must be >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("grid ratio must lie strictly between 0 and 1");
    const double top = lambda_max(design.x, target, family, penalty);
    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    const double step = std::log(ratio) / static_cast<double>(grid_size - 1);
    for (int k = 0; k < grid_size; ++k) grid[static_cast<std::size_t>(k)] = top * std::exp(step * k);
    grid.front() = top;
    return grid;
}

namespace {

double loss_of(const GlmModel& model, const EncodedDesign& design, std::span<const double> target) {
    return metrics(predict(model, design), target, model.family).value;
}

}  // namespace

SearchResult lambda_search(const EncodedDesign& train, std::span<const double> train_target,
                           const EncodedDesign& valid, std::span<const double> valid_target, Family family,
                           const PenaltySpec& penalty, std::span<const double> grid, const FitOptions& options) {
    if (valid.rows() == 0 || valid_target.empty()) throw InputError("lambda_search: validation set is empty");
    if (valid.rows() != valid_target.size()) throw InputError("lambda_search: validation design/target mismatch");
    if (train.cols() != valid.cols() || train.blocks.size() != valid.blocks.size())
        throw InputError("lambda_search: train and validation designs differ in block structure");
    for (std::size_t b = 0; b < train.blocks.size(); ++b)
        if (train.blocks[b].feature != valid.blocks[b].feature ||
            train.blocks[b].column_count() != valid.blocks[b].column_count())
            throw InputError("lambda_search: block '" + train.blocks[b].feature + "' differs between train and validation");
    if (grid.empty()) throw InputError("lambda_search: empty grid");

    SearchResult best;
    best.report.lambdas.assign(grid.begin(), grid.end());
    best.report.validation_loss.reserve(grid.size());
    double best_loss = std::numeric_limits<double>::infinity();
    GlmModel current;
    bool have_current = false;
    for (double lambda : grid) {
        current = fit(train, train_target, family, penalty.with_lambda(lambda), have_current ? &current : nullptr,
                      options);
        have_current = true;
        const double loss = loss_of(current, valid, valid_target);
        best.report.validation_loss.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best.model = current;
        }
    }
    best.report.chosen_lambda = best.model.lambda;
    best.report.nonzero_count = best.model.nonzero_count();
    best.report.validation_loss_at_chosen = best_loss;
    best.report.train_loss = loss_of(best.model, train, train_target);
    return best;
}

}  // namespace r2vf
