#include "r2vf/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "r2vf/error.hpp"

namespace r2vf {

std::string_view to_string(Family family) { return family == Family::binomial ? "binomial" : "gaussian"; }

Family parse_family(std::string_view text) {
    if (text == "gaussian") return Family::gaussian;
    if (text == "binomial") return Family::binomial;
    throw InputError("unknown family '" + std::string(text) + "' (expected gaussian or binomial)");
}

std::string_view to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::l1: return "l1";
        case PenaltyKind::l2: return "l2";
        case PenaltyKind::none: return "none";
    }
    return "?";
}

PenaltyKind parse_penalty_kind(std::string_view text) {
    if (text == "l1") return PenaltyKind::l1;
    if (text == "l2") return PenaltyKind::l2;
    if (text == "none") return PenaltyKind::none;
    throw InputError("unknown penalty kind '" + std::string(text) + "'");
}

PenaltySpec PenaltySpec::uniform(std::size_t columns, int alpha, double lambda) {
    if (alpha != 1 && alpha != 2) throw InputError("penalty exponent must be 1 or 2");
    return {std::vector<PenaltyKind>(columns, alpha == 1 ? PenaltyKind::l1 : PenaltyKind::l2), lambda};
}

PenaltySpec PenaltySpec::unpenalized(std::size_t columns) {
    return {std::vector<PenaltyKind>(columns, PenaltyKind::none), 0.0};
}

PenaltySpec PenaltySpec::with_lambda(double value) const {
    PenaltySpec out = *this;
    out.lambda = value;
    return out;
}

bool PenaltySpec::any_penalized() const {
    return std::any_of(kinds.begin(), kinds.end(), [](PenaltyKind k) { return k != PenaltyKind::none; });
}

void PenaltySpec::validate(std::size_t columns) const {
    if (kinds.size() != columns)
        throw InputError("penalty spec has " + std::to_string(kinds.size()) + " kinds for " + std::to_string(columns) +
                         " columns");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be finite and >= 0");
}

std::size_t GlmModel::nonzero_count() const {
    return static_cast<std::size_t>(
        std::count_if(coefficients.begin(), coefficients.end(), [](double c) { return c != 0.0; }));
}

namespace {

constexpr std::size_t kPolishChunk = 2048;

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double penalty_value(std::span<const PenaltyKind> kinds, double lambda, std::span<const double> beta) {
    double p = 0.0;
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (kinds[j] == PenaltyKind::l1) p += std::abs(beta[j]);
        else if (kinds[j] == PenaltyKind::l2) p += 0.5 * beta[j] * beta[j];
    }
    return lambda * p;
}

std::vector<double> eta_of(const BinaryMatrix& x, double intercept, std::span<const double> beta) {
    std::vector<double> eta(x.rows(), intercept);
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (auto c : x.row(r)) eta[r] += beta[c];
    return eta;
}

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

/// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

// Weighted least squares  1/2 sum_i v_i (z_i - b0 - x_i.beta)^2 + penalty, solved in place.
// With few enough columns the coordinate gradients are kept up to date through
// lazily computed weighted Gram columns; otherwise through the residual vector.
class WlsSolver {
public:
    WlsSolver(const BinaryMatrix& x, std::span<const double> z, std::span<const double> v,
              std::span<const PenaltyKind> kinds, double lambda, const FitOptions& options)
        : x_(x), z_(z), v_(v), kinds_(kinds), lambda_(lambda), opt_(options), use_gram_(x.cols() <= options.gram_limit),
          h_(x.cols(), 0.0), c_(x.cols(), 0.0), grad_(x.cols(), 0.0) {
        for (std::size_t j = 0; j < x.cols(); ++j)
            for (auto i : x.column(j)) {
                h_[j] += v_[i];
                c_[j] += v_[i] * z_[i];
            }
        for (std::size_t i = 0; i < z_.size(); ++i) {
            v_sum_ += v_[i];
            c0_ += v_[i] * z_[i];
        }
        if (use_gram_) gram_.resize(x.cols());
    }

    struct Outcome {
        int sweeps = 0;
        bool converged = false;
    };

    Outcome solve(double& b0, std::vector<double>& beta, int max_sweeps, bool observe) {
        b0_ = &b0;
        beta_ = &beta;
        for (std::size_t j = 0; j < beta.size(); ++j)
            if (h_[j] <= 0.0) beta[j] = 0.0;
        observe_ = observe;
        refresh();

        Outcome out;
        all_.resize(beta.size());
        for (std::size_t j = 0; j < all_.size(); ++j) all_[j] = j;
        constexpr int kRounds = 4;
        for (int round = 0; round < kRounds; ++round) {
            if (!descend(out, max_sweeps)) return out;
            out.converged = true;
            if (round + 1 == kRounds || opt_.polish_limit == 0 || !polish(out)) break;
            // The exact solve fixed the active set; confirm no inactive column wants in.
            if (inactive_kkt_ok()) break;
            out.converged = false;
        }
        return out;
    }

private:
    std::vector<double> residual() const {
        std::vector<double> r(z_.begin(), z_.end());
        const auto eta = eta_of(x_, *b0_, *beta_);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= eta[i];
        return r;
    }

    double objective() const {
        const auto r = residual();
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += v_[i] * r[i] * r[i];
        return 0.5 * s + penalty_value(kinds_, lambda_, *beta_);
    }

    void notify(Outcome& out) {
        if (observe_ && opt_.on_sweep) opt_.on_sweep(out.sweeps, objective());
    }

    // Gradients (as weighted residual sums) from scratch.
    void refresh() {
        if (use_gram_) {
            rebuild_grad();
            return;
        }
        resid_ = residual();
        g0_ = 0.0;
        for (std::size_t i = 0; i < resid_.size(); ++i) g0_ += v_[i] * resid_[i];
    }

    const std::vector<double>& gram(std::size_t j) {
        auto& g = gram_[j];
        if (g.empty()) {
            // Difference array over each row's runs, then a prefix sum.
            g.assign(x_.cols() + 1, 0.0);
            for (auto i : x_.column(j))
                for (const auto& run : x_.row_runs(i)) {
                    g[run.first] += v_[i];
                    g[run.last + 1] -= v_[i];
                }
            for (std::size_t k = 1; k < g.size(); ++k) g[k] += g[k - 1];
            g.pop_back();
        }
        return g;
    }

    void rebuild_grad() {
        const auto& beta = *beta_;
        grad_ = c_;
        g0_ = c0_ - v_sum_ * *b0_;
        for (std::size_t j = 0; j < grad_.size(); ++j) grad_[j] -= h_[j] * *b0_;
        for (std::size_t k = 0; k < beta.size(); ++k) {
            if (beta[k] == 0.0) continue;
            const auto& g = gram(k);
            for (std::size_t j = 0; j < grad_.size(); ++j) grad_[j] -= g[j] * beta[k];
            g0_ -= h_[k] * beta[k];
        }
    }

    double gradient(std::size_t j) const {
        if (use_gram_) return grad_[j];
        double g = 0.0;
        for (auto i : x_.column(j)) g += v_[i] * resid_[i];
        return g;
    }

    double update_intercept() {
        if (v_sum_ <= 0.0) return 0.0;
        const double d = g0_ / v_sum_;
        if (d == 0.0) return 0.0;
        *b0_ += d;
        g0_ -= v_sum_ * d;
        if (use_gram_) {
            for (auto k : *tracked_) grad_[k] -= h_[k] * d;
        } else {
            for (auto& r : resid_) r -= d;
        }
        return std::abs(d);
    }

    double update(std::size_t j) {
        const double h = h_[j];
        if (h <= 0.0) return 0.0;
        double& b = (*beta_)[j];
        const double u = h * b + gradient(j);
        double nb;
        switch (kinds_[j]) {
            case PenaltyKind::l1: nb = soft_threshold(u, lambda_) / h; break;
            case PenaltyKind::l2: nb = u / (h + lambda_); break;
            default: nb = u / h; break;
        }
        const double d = nb - b;
        if (d == 0.0) return 0.0;
        b = nb;
        g0_ -= h * d;
        if (use_gram_) {
            const auto& g = gram(j);
            for (auto k : *tracked_) grad_[k] -= g[k] * d;
        } else {
            for (auto i : x_.column(j)) resid_[i] -= d;
        }
        return std::abs(d);
    }

    double sweep(const std::vector<std::size_t>& coords) {
        tracked_ = &coords;
        double change = update_intercept();
        for (auto j : coords) change = std::max(change, update(j));
        return change;
    }

    // Full sweeps interleaved with sweeps over the active set until a full sweep
    // moves nothing. Once the signed support repeats across full sweeps, the exact
    // active-set solve usually finishes the job.
    bool descend(Outcome& out, int max_sweeps) {
        constexpr int kActiveSweeps = 30;
        std::vector<signed char> signs, last_signs;
        while (out.sweeps < max_sweeps) {
            const double full = sweep(all_);
            ++out.sweeps;
            notify(out);
            if (full < opt_.tol) return true;
            active_.clear();
            signs.assign(beta_->size(), 0);
            for (std::size_t j = 0; j < beta_->size(); ++j) {
                const double b = (*beta_)[j];
                if (b != 0.0) active_.push_back(j);
                signs[j] = static_cast<signed char>((b > 0) - (b < 0));
            }
            if (signs == last_signs && opt_.polish_limit > 0 && polish(out) && inactive_kkt_ok()) return true;
            last_signs = signs;
            for (int k = 0; k < kActiveSweeps && out.sweeps < max_sweeps; ++k) {
                const double c = sweep(active_);
                ++out.sweeps;
                notify(out);
                if (c < opt_.tol) break;
            }
            // Gradients of inactive columns went stale during the active sweeps.
            if (use_gram_) rebuild_grad();
        }
        return false;
    }

    void assemble_dense(const std::vector<std::size_t>& act, Eigen::MatrixXd& gram, Eigen::VectorXd& rhs) {
        const std::size_t k = act.size() + 1;
        const auto ki = static_cast<Eigen::Index>(k);
        gram = Eigen::MatrixXd::Zero(ki, ki);
        rhs = Eigen::VectorXd::Zero(ki);
        if (use_gram_) {
            gram(0, 0) = v_sum_;
            rhs(0) = c0_;
            for (std::size_t a = 0; a < act.size(); ++a) {
                const auto ia = static_cast<Eigen::Index>(a + 1);
                const auto& g = this->gram(act[a]);
                gram(ia, 0) = gram(0, ia) = h_[act[a]];
                rhs(ia) = c_[act[a]];
                for (std::size_t b = 0; b < act.size(); ++b) gram(static_cast<Eigen::Index>(b + 1), ia) = g[act[b]];
            }
            return;
        }
        std::vector<std::ptrdiff_t> pos(x_.cols(), -1);
        for (std::size_t a = 0; a < act.size(); ++a) pos[act[a]] = static_cast<std::ptrdiff_t>(a + 1);
        const std::size_t n = x_.rows();
        Eigen::MatrixXd chunk;
        for (std::size_t start = 0; start < n; start += kPolishChunk) {
            const std::size_t len = std::min(kPolishChunk, n - start);
            chunk.setZero(static_cast<Eigen::Index>(len), ki);
            for (std::size_t r = 0; r < len; ++r) {
                const std::size_t i = start + r;
                const double s = std::sqrt(v_[i]);
                const auto ri = static_cast<Eigen::Index>(r);
                chunk(ri, 0) = s;
                for (auto c : x_.row(i))
                    if (pos[c] > 0) chunk(ri, pos[c]) = s;
                for (Eigen::Index a = 0; a < ki; ++a) rhs(a) += chunk(ri, a) * s * z_[i];
            }
            gram.selfadjointView<Eigen::Lower>().rankUpdate(chunk.transpose());
        }
        gram = gram.selfadjointView<Eigen::Lower>();
    }

    // Exact minimizer on the current support with signs held fixed. Accepted
    // only when it keeps every l1 sign and does not raise the objective.
    bool polish(Outcome& out) {
        auto& beta = *beta_;
        std::vector<std::size_t> act;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            if (h_[j] <= 0.0) continue;
            if (beta[j] != 0.0 || kinds_[j] != PenaltyKind::l1) act.push_back(j);
        }
        if (act.size() > opt_.polish_limit) return false;
        Eigen::MatrixXd gram;
        Eigen::VectorXd rhs;
        assemble_dense(act, gram, rhs);
        for (std::size_t a = 0; a < act.size(); ++a) {
            const auto idx = static_cast<Eigen::Index>(a + 1);
            const std::size_t j = act[a];
            if (kinds_[j] == PenaltyKind::l1) rhs(idx) -= lambda_ * (beta[j] > 0 ? 1.0 : -1.0);
            else if (kinds_[j] == PenaltyKind::l2) gram(idx, idx) += lambda_;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        // A near-singular support (collinear columns) gives no trustworthy exact solve.
        const Eigen::VectorXd d = ldlt.vectorD();
        if (d.minCoeff() <= 1e-10 * std::max(1.0, d.maxCoeff())) return false;
        const Eigen::VectorXd sol = ldlt.solve(rhs);
        if (!sol.allFinite()) return false;
        for (std::size_t a = 0; a < act.size(); ++a) {
            const std::size_t j = act[a];
            if (kinds_[j] != PenaltyKind::l1) continue;
            const double nb = sol(static_cast<Eigen::Index>(a + 1));
            if (nb == 0.0 || (nb > 0) != (beta[j] > 0)) return false;
        }

        const double before = objective();
        const double old_b0 = *b0_;
        const auto old_beta = beta;
        *b0_ = sol(0);
        for (std::size_t a = 0; a < act.size(); ++a) beta[act[a]] = sol(static_cast<Eigen::Index>(a + 1));
        const double after = objective();
        if (!(after <= before + 1e-14 * std::max(1.0, std::abs(before)))) {
            *b0_ = old_b0;
            beta = old_beta;
            return false;
        }
        refresh();
        ++out.sweeps;
        notify(out);
        return true;
    }

    bool inactive_kkt_ok() const {
        const auto& beta = *beta_;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            if (beta[j] != 0.0 || h_[j] <= 0.0 || kinds_[j] != PenaltyKind::l1) continue;
            if (std::abs(gradient(j)) > lambda_ + opt_.tol) return false;
        }
        return true;
    }

    const BinaryMatrix& x_;
    std::span<const double> z_;
    std::span<const double> v_;
    std::span<const PenaltyKind> kinds_;
    double lambda_;
    const FitOptions& opt_;
    bool use_gram_;
    std::vector<double> h_;
    std::vector<double> c_;
    std::vector<double> grad_;
    std::vector<std::vector<double>> gram_;
    double v_sum_ = 0.0;
    double c0_ = 0.0;
    double g0_ = 0.0;
    std::vector<double> resid_;
    std::vector<std::size_t> all_;
    std::vector<std::size_t> active_;
    const std::vector<std::size_t>* tracked_ = nullptr;
    double* b0_ = nullptr;
    std::vector<double>* beta_ = nullptr;
    bool observe_ = false;
};

void check_inputs(const BinaryMatrix& x, std::span<const double> y, Family family, const PenaltySpec& penalty) {
    if (x.rows() != y.size())
        throw InputError("design has " + std::to_string(x.rows()) + " rows but target has " + std::to_string(y.size()));
    if (y.empty()) throw InputError("cannot fit on zero rows");
    penalty.validate(x.cols());
    for (double t : y) {
        if (!std::isfinite(t)) throw InputError("target contains non-finite values");
        if (family == Family::binomial && t != 0.0 && t != 1.0)
            throw InputError("binomial target must be 0 or 1");
    }
}

double mean_of(std::span<const double> y) {
    double s = 0.0;
    for (double t : y) s += t;
    return s / static_cast<double>(y.size());
}

GlmModel make_model(Family family, double b0, std::vector<double> beta, double lambda) {
    GlmModel m;
    m.family = family;
    m.intercept = b0;
    m.coefficients = std::move(beta);
    m.lambda = lambda;
    return m;
}

GlmModel fit_gaussian(const BinaryMatrix& x, std::span<const double> y, const PenaltySpec& penalty,
                      double b0, std::vector<double> beta, const FitOptions& opt) {
    const std::vector<double> v(y.size(), 1.0 / static_cast<double>(y.size()));
    WlsSolver solver(x, y, v, penalty.kinds, penalty.lambda, opt);
    const auto out = solver.solve(b0, beta, opt.max_sweeps, true);
    auto model = make_model(Family::gaussian, b0, std::move(beta), penalty.lambda);
    if (!out.converged)
        throw NonConvergenceError("coordinate descent did not converge in " + std::to_string(opt.max_sweeps) +
                                      " sweeps (lambda=" + std::to_string(penalty.lambda) + ")",
                                  std::move(model));
    return model;
}

GlmModel fit_binomial(const BinaryMatrix& x, std::span<const double> y, const PenaltySpec& penalty, double b0,
                      std::vector<double> beta, const FitOptions& opt) {
    const std::size_t n = y.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    auto objective_at = [&](double c0, std::span<const double> c) {
        return penalized_objective(x, y, Family::binomial, penalty, c0, c);
    };
    double obj = objective_at(b0, beta);
    std::vector<double> z(n), v(n);
    for (int it = 0; it < opt.max_irls; ++it) {
        const auto eta = eta_of(x, b0, beta);
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(eta[i]);
            const double w = std::max(p * (1.0 - p), opt.weight_floor);
            z[i] = eta[i] + (y[i] - p) / w;
            v[i] = w * inv_n;
        }
        double nb0 = b0;
        auto nbeta = beta;
        WlsSolver solver(x, z, v, penalty.kinds, penalty.lambda, opt);
        solver.solve(nb0, nbeta, opt.max_inner_sweeps, false);

        // Step-halve toward the previous iterate if the true objective went up.
        double nobj = objective_at(nb0, nbeta);
        double t = 1.0;
        const double full_b0 = nb0;
        const auto full_beta = nbeta;
        while (!(nobj <= obj + 1e-12 * std::max(1.0, std::abs(obj))) && t > 1e-6) {
            t *= 0.5;
            nb0 = b0 + t * (full_b0 - b0);
            for (std::size_t j = 0; j < nbeta.size(); ++j) nbeta[j] = beta[j] + t * (full_beta[j] - beta[j]);
            nobj = objective_at(nb0, nbeta);
        }
        double change = std::abs(nb0 - b0);
        for (std::size_t j = 0; j < nbeta.size(); ++j) change = std::max(change, std::abs(nbeta[j] - beta[j]));
        b0 = nb0;
        beta = std::move(nbeta);
        obj = nobj;
        if (change < opt.tol) return make_model(Family::binomial, b0, std::move(beta), penalty.lambda);
    }
    throw NonConvergenceError("IRLS did not converge in " + std::to_string(opt.max_irls) +
                                  " iterations (lambda=" + std::to_string(penalty.lambda) + ")",
                              make_model(Family::binomial, b0, std::move(beta), penalty.lambda));
}

}  // namespace

GlmModel fit(const BinaryMatrix& x, std::span<const double> target, Family family, const PenaltySpec& penalty,
             const GlmModel* warm_start, const FitOptions& options) {
    check_inputs(x, target, family, penalty);
    double b0;
    std::vector<double> beta;
    if (warm_start && warm_start->coefficients.size() == x.cols()) {
        b0 = warm_start->intercept;
        beta = warm_start->coefficients;
    } else {
        const double ybar = mean_of(target);
        b0 = family == Family::gaussian ? ybar : std::log(std::clamp(ybar, 1e-6, 1 - 1e-6) /
                                                          (1 - std::clamp(ybar, 1e-6, 1 - 1e-6)));
        beta.assign(x.cols(), 0.0);
    }
    return family == Family::gaussian ? fit_gaussian(x, target, penalty, b0, std::move(beta), options)
                                      : fit_binomial(x, target, penalty, b0, std::move(beta), options);
}

GlmModel fit(const EncodedDesign& design, std::span<const double> target, Family family, const PenaltySpec& penalty,
             const GlmModel* warm_start, const FitOptions& options) {
    try {
        auto model = fit(design.x, target, family, penalty, warm_start, options);
        model.blocks = design.blocks;
        return model;
    } catch (const NonConvergenceError& e) {
        auto last = e.last_iterate();
        last.blocks = design.blocks;
        throw NonConvergenceError(e.what(), std::move(last));
    }
}

std::vector<double> linear_predictor(const GlmModel& model, const BinaryMatrix& x) {
    if (x.cols() != model.coefficients.size())
        throw InputError("design has " + std::to_string(x.cols()) + " columns, model expects " +
                         std::to_string(model.coefficients.size()));
    return eta_of(x, model.intercept, model.coefficients);
}

std::vector<double> predict(const GlmModel& model, const EncodedDesign& design) {
    if (design.blocks.size() == model.blocks.size()) {
        for (std::size_t b = 0; b < design.blocks.size(); ++b)
            if (design.blocks[b].feature != model.blocks[b].feature ||
                design.blocks[b].column_count() != model.blocks[b].column_count())
                throw InputError("design block '" + design.blocks[b].feature + "' does not match the model");
    } else if (!model.blocks.empty()) {
        throw InputError("design block structure does not match the model");
    }
    auto out = linear_predictor(model, design.x);
    if (model.family == Family::binomial) {
        constexpr double lo = std::numeric_limits<double>::min();
        const double hi = std::nextafter(1.0, 0.0);
        for (auto& e : out) e = std::clamp(sigmoid(e), lo, hi);
    }
    return out;
}

std::string_view to_string(MetricKind kind) { return kind == MetricKind::rmse ? "rmse" : "log_loss"; }

double rmse(std::span<const double> predictions, std::span<const double> target) {
    if (predictions.empty() || predictions.size() != target.size())
        throw InputError("rmse needs equal, non-zero lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - target[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(predictions.size()));
}

double log_loss(std::span<const double> probabilities, std::span<const double> target) {
    if (probabilities.empty() || probabilities.size() != target.size())
        throw InputError("log_loss needs equal, non-zero lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = std::clamp(probabilities[i], 1e-12, 1.0 - 1e-12);
        s += target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
    }
    return -s / static_cast<double>(probabilities.size());
}

Metric metrics(std::span<const double> predictions, std::span<const double> target, Family family) {
    if (family == Family::binomial) return {MetricKind::log_loss, log_loss(predictions, target)};
    return {MetricKind::rmse, rmse(predictions, target)};
}

double mean_loss(const BinaryMatrix& x, std::span<const double> target, Family family, double intercept,
                 std::span<const double> beta) {
    const auto eta = eta_of(x, intercept, beta);
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (family == Family::gaussian) {
            const double r = target[i] - eta[i];
            s += 0.5 * r * r;
        } else {
            s += softplus(eta[i]) - target[i] * eta[i];
        }
    }
    return s / static_cast<double>(eta.size());
}

double penalized_objective(const BinaryMatrix& x, std::span<const double> target, Family family,
                           const PenaltySpec& penalty, double intercept, std::span<const double> beta) {
    return mean_loss(x, target, family, intercept, beta) + penalty_value(penalty.kinds, penalty.lambda, beta);
}

std::vector<double> loss_gradient(const BinaryMatrix& x, std::span<const double> target, Family family,
                                  double intercept, std::span<const double> beta) {
    const auto eta = eta_of(x, intercept, beta);
    const double inv_n = 1.0 / static_cast<double>(eta.size());
    std::vector<double> resid(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i)
        resid[i] = target[i] - (family == Family::gaussian ? eta[i] : sigmoid(eta[i]));
    std::vector<double> g(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double s = 0.0;
        for (auto i : x.column(j)) s += resid[i];
        g[j] = -s * inv_n;
    }
    return g;
}

}  // namespace r2vf
