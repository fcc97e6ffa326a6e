#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "r2vf/benchmark.hpp"
#include "r2vf/data.hpp"
#include "r2vf/encoding.hpp"
#include "r2vf/glm.hpp"
#include "r2vf/pipeline.hpp"

namespace r2vf::test {

using Rng = std::mt19937_64;

/// Random 0/1 design; every column gets at least one 1 and one 0.
inline BinaryMatrix random_binary(std::size_t rows, std::size_t cols, double density, Rng& rng) {
    std::bernoulli_distribution coin(density);
    std::uniform_int_distribution<std::size_t> pick(0, rows - 1);
    std::vector<std::vector<std::uint32_t>> columns(cols);
    for (auto& col : columns) {
        std::vector<char> on(rows, 0);
        for (std::size_t r = 0; r < rows; ++r) on[r] = coin(rng);
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        on[a] = 1;
        on[b] = 0;
        for (std::size_t r = 0; r < rows; ++r)
            if (on[r]) col.push_back(static_cast<std::uint32_t>(r));
    }
    return BinaryMatrix(rows, std::move(columns));
}

inline Eigen::MatrixXd dense(const BinaryMatrix& x) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
    for (std::size_t j = 0; j < x.cols(); ++j)
        for (auto i : x.column(j)) m(i, static_cast<Eigen::Index>(j)) = 1.0;
    return m;
}

/// [1, X] as a dense matrix.
inline Eigen::MatrixXd with_intercept(const BinaryMatrix& x) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols() + 1));
    m.col(0).setOnes();
    m.rightCols(static_cast<Eigen::Index>(x.cols())) = dense(x);
    return m;
}

inline Eigen::VectorXd vec(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline bool full_rank(const BinaryMatrix& x) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(with_intercept(x));
    return qr.rank() == static_cast<Eigen::Index>(x.cols() + 1);
}

/// Least squares by pivoted QR: (intercept, coefficients...).
inline Eigen::VectorXd ols(const BinaryMatrix& x, std::span<const double> y) {
    return with_intercept(x).colPivHouseholderQr().solve(vec(y));
}

/// Derivative of the mean loss with respect to each column, from dense algebra.
inline Eigen::VectorXd dense_gradient(const BinaryMatrix& x, std::span<const double> y, Family family,
                                      double b0, std::span<const double> beta) {
    const Eigen::MatrixXd xd = dense(x);
    Eigen::VectorXd eta = (xd * vec(beta)).array() + b0;
    if (family == Family::binomial) eta = eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
    return -(xd.transpose() * (vec(y) - eta)) / static_cast<double>(y.size());
}

/// Largest violation of the l1 optimality conditions at `model`.
inline double kkt_violation(const BinaryMatrix& x, std::span<const double> y, Family family,
                            const PenaltySpec& penalty, const GlmModel& model) {
    const auto g = dense_gradient(x, y, family, model.intercept, model.coefficients);
    const double lambda = penalty.lambda;
    double worst = 0.0;
    for (std::size_t j = 0; j < model.coefficients.size(); ++j) {
        const double b = model.coefficients[j];
        const double gj = g(static_cast<Eigen::Index>(j));
        double v = 0.0;
        switch (penalty.kinds[j]) {
            case PenaltyKind::l1: v = b != 0.0 ? std::abs(gj + lambda * (b > 0 ? 1.0 : -1.0))
                                               : std::max(0.0, std::abs(gj) - lambda);
                break;
            case PenaltyKind::l2: v = std::abs(gj + lambda * b); break;
            case PenaltyKind::none: v = std::abs(gj); break;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

/// Negative mean log-likelihood of a logistic model, written out directly.
inline double logistic_nll(const Eigen::MatrixXd& xd, const Eigen::VectorXd& y, double b0, const Eigen::VectorXd& beta) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < xd.rows(); ++i) {
        const double eta = b0 + xd.row(i).dot(beta);
        s += std::log1p(std::exp(-std::abs(eta))) + std::max(eta, 0.0) - y(i) * eta;
    }
    return s / static_cast<double>(xd.rows());
}

/// Direct fused objective over bin effects beta (beta[0] is the reference, 0).
inline double fused_objective(std::span<const std::size_t> level, std::span<const double> y, double b0,
                              std::span<const double> beta, double lambda) {
    double rss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - b0 - beta[level[i]];
        rss += r * r;
    }
    double pen = 0.0;
    for (std::size_t j = 1; j < beta.size(); ++j) pen += std::abs(beta[j] - beta[j - 1]);
    return rss / (2.0 * static_cast<double>(y.size())) + lambda * pen;
}

/// Minimum of the fused objective by enumerating the sign of every adjacent
/// difference. Each pattern fixes the penalty as a linear term over merged
/// groups, leaving a least-squares problem solved in closed form.
inline double fused_oracle(std::span<const std::size_t> level, std::span<const double> y, std::size_t bins,
                           double lambda) {
    const std::size_t d = bins - 1;
    std::size_t patterns = 1;
    for (std::size_t k = 0; k < d; ++k) patterns *= 3;
    const double n = static_cast<double>(y.size());
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> sign(d);
    for (std::size_t p = 0; p < patterns; ++p) {
        std::size_t code = p;
        for (std::size_t k = 0; k < d; ++k) {
            sign[k] = static_cast<int>(code % 3) - 1;
            code /= 3;
        }
        // Groups of bins tied by zero differences; group 0 holds the reference.
        std::vector<std::size_t> group(bins, 0);
        for (std::size_t j = 1; j < bins; ++j) group[j] = group[j - 1] + (sign[j - 1] != 0 ? 1 : 0);
        const std::size_t g = group.back() + 1;
        // Unknowns: intercept, then the values of groups 1..g-1.
        const auto k = static_cast<Eigen::Index>(g);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(y.size()), k);
        for (std::size_t i = 0; i < y.size(); ++i) {
            a(static_cast<Eigen::Index>(i), 0) = 1.0;
            if (group[level[i]] > 0) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(group[level[i]])) = 1.0;
        }
        Eigen::VectorXd lin = Eigen::VectorXd::Zero(k);  // d/dtheta of lambda * sum s_j (beta_j - beta_{j-1})
        for (std::size_t j = 1; j < bins; ++j) {
            if (sign[j - 1] == 0) continue;
            if (group[j] > 0) lin(static_cast<Eigen::Index>(group[j])) += lambda * sign[j - 1];
            if (group[j - 1] > 0) lin(static_cast<Eigen::Index>(group[j - 1])) -= lambda * sign[j - 1];
        }
        const Eigen::MatrixXd h = a.transpose() * a / n;
        const Eigen::VectorXd rhs = a.transpose() * vec(y) / n - lin;
        const Eigen::VectorXd theta = h.completeOrthogonalDecomposition().solve(rhs);
        std::vector<double> beta(bins, 0.0);
        for (std::size_t j = 0; j < bins; ++j)
            if (group[j] > 0) beta[j] = theta(static_cast<Eigen::Index>(group[j]));
        best = std::min(best, fused_objective(level, y, theta(0), beta, lambda));
    }
    return best;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag = "r2vf") {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::vector<std::size_t> random_levels(std::size_t rows, std::size_t bins, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, bins - 1);
    std::vector<std::size_t> level(rows);
    for (std::size_t i = 0; i < rows; ++i) level[i] = i < bins ? i : pick(rng);
    std::shuffle(level.begin(), level.end(), rng);
    return level;
}

// Property cases shared by the unit tests and the acceptance run. Each returns
// an empty string when the case holds, else a description of the violation.

inline std::string split_rows_monotone_case(Rng& rng) {
    std::uniform_int_distribution<int> n_edges(1, 12);
    std::uniform_real_distribution<double> gap(0.01, 5.0);
    std::vector<double> edges;
    double e = std::uniform_real_distribution<double>(-50, 50)(rng);
    for (int k = n_edges(rng); k > 0; --k) edges.push_back(e += gap(rng));
    BinningScheme scheme{"f", edges};
    std::uniform_real_distribution<double> val(edges.front() - 10, edges.back() + 10);
    std::vector<double> values(std::uniform_int_distribution<std::size_t>(1, 60)(rng));
    for (auto& v : values) v = std::uniform_int_distribution<int>(0, 4)(rng) == 0 ? edges[rng() % edges.size()] : val(rng);
    const auto block = split_code(values, scheme);
    const auto& x = block.columns;
    if (x.cols() != edges.size()) return "column count " + std::to_string(x.cols());
    for (std::size_t r = 0; r < values.size(); ++r) {
        bool seen_zero = false;
        std::size_t ones = 0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const bool on = x(r, c);
            if (on && seen_zero) return "row " + std::to_string(r) + " has a 1 after a 0";
            if (on != (values[r] >= edges[c])) return "row " + std::to_string(r) + " disagrees with its edge";
            seen_zero = seen_zero || !on;
            ones += on;
        }
        if (ones != scheme.bin_of(values[r])) return "row " + std::to_string(r) + " is not its bin";
    }
    return {};
}

/// Dyadic values keep every difference and partial sum exact.
inline std::string round_trip_case(Rng& rng) {
    std::vector<double> beta(std::uniform_int_distribution<std::size_t>(0, 25)(rng));
    std::uniform_int_distribution<int> num(-(1 << 20), 1 << 20);
    for (auto& b : beta) b = rng() % 4 == 0 ? 0.0 : std::ldexp(num(rng), -static_cast<int>(rng() % 12));
    const auto back = back_transform(forward_difference(beta));
    if (back != beta) return "round trip changed a value";
    return {};
}

inline std::string cluster_contiguity_case(Rng& rng) {
    GlmModel model;
    const std::size_t features = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    std::uniform_int_distribution<int> step(-5, 5);
    for (std::size_t f = 0; f < features; ++f) {
        FeatureBlock block;
        block.feature = "f" + std::to_string(f);
        block.coding = Coding::split;
        const std::size_t levels = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
        for (std::size_t l = 0; l < levels; ++l) block.levels.push_back("L" + std::to_string(l));
        block.first_column = model.coefficients.size();
        for (std::size_t c = 0; c + 1 < levels; ++c)
            model.coefficients.push_back(rng() % 2 ? 0.0 : step(rng) * 0.25 + 0.125);
        model.blocks.push_back(block);
    }
    const auto map = extract_clusters(model);
    for (std::size_t f = 0; f < features; ++f) {
        const auto& fc = map.features[f];
        const auto& block = model.blocks[f];
        const std::span<const double> deltas(model.coefficients.data() + block.first_column, block.column_count());
        const auto beta = back_transform(deltas);
        if (fc.cluster_of_level.empty() || fc.cluster_of_level[0] != 0) return "reference is not cluster 0";
        if (fc.coefficients[0] != 0.0) return "reference cluster coefficient is not 0";
        for (std::size_t l = 1; l < fc.levels.size(); ++l) {
            const std::size_t a = fc.cluster_of_level[l - 1], b = fc.cluster_of_level[l];
            if (b != a && b != a + 1) return "cluster ids skip between adjacent levels";
            if ((b == a) != (deltas[l - 1] == 0.0)) return "merge disagrees with a zero delta";
            if (fc.coefficients[b] != beta[l - 1]) return "cluster coefficient differs from its levels";
        }
        // A cluster's levels form one contiguous run.
        std::vector<std::size_t> first(fc.cluster_count(), SIZE_MAX), last(fc.cluster_count(), 0), count(fc.cluster_count(), 0);
        for (std::size_t l = 0; l < fc.levels.size(); ++l) {
            const auto c = fc.cluster_of_level[l];
            first[c] = std::min(first[c], l);
            last[c] = l;
            ++count[c];
        }
        for (std::size_t c = 0; c < fc.cluster_count(); ++c)
            if (last[c] - first[c] + 1 != count[c]) return "cluster is not contiguous";
    }
    return {};
}

/// Small random table through every benchmark method; no held-out row may reach a fit.
inline std::string leakage_case(Rng& rng) {
    SynthConfig synth;
    synth.n_rows = std::uniform_int_distribution<std::size_t>(80, 240)(rng);
    synth.n_professions = std::uniform_int_distribution<int>(3, 15)(rng);
    synth.seed = rng();
    R2vfConfig config;
    config.grid_size = 8;
    config.min_obs_per_bin = 3;
    config.seed = rng();
    BenchOptions options;
    options.test_fraction = std::uniform_real_distribution<double>(0.2, 0.6)(rng);
    const auto result = run_synthetic_bench(1, synth, config, options);
    for (const auto& audit : result.audits) {
        if (audit.test_rows.empty()) return "no test rows";
        std::vector<std::size_t> both;
        std::set_intersection(audit.fit_rows.begin(), audit.fit_rows.end(), audit.test_rows.begin(),
                              audit.test_rows.end(), std::back_inserter(both));
        if (!both.empty()) return "row " + std::to_string(both.front()) + " is both fitted and tested";
        if (audit.fit_rows.size() + audit.test_rows.size() != synth.n_rows &&
            !result.records[static_cast<std::size_t>(&audit - result.audits.data())].failed)
            return "fit and test rows do not cover the table";
    }
    return {};
}

}  // namespace r2vf::test
