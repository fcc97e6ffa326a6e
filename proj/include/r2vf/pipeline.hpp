#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "r2vf/encoding.hpp"
#include "r2vf/glm.hpp"
#include "r2vf/table.hpp"

namespace r2vf {

enum class RankingPenalty { lasso, ridge };
enum class ReferencePolicy { most_frequent, target_mean };

std::string_view to_string(RankingPenalty p);
RankingPenalty parse_ranking_penalty(std::string_view text);
std::string_view to_string(ReferencePolicy p);
ReferencePolicy parse_reference_policy(std::string_view text);

struct R2vfConfig {
    int n = 30;  // default max bins for numeric and ordinal features
    int m = 75;  // default max bins for ordinalized nominal features
    RankingPenalty ranking_penalty = RankingPenalty::lasso;
    bool refit = true;
    int grid_size = 100;
    double grid_ratio = 1e-4;
    double validation_fraction = 0.25;
    int min_obs_per_bin = 10;
    std::uint64_t seed = 1;
    ReferencePolicy nominal_reference = ReferencePolicy::most_frequent;
    Family family = Family::gaussian;
    FitOptions solver;

    void validate() const;
};

/// Spec with max_bins = n (ordered) or m (nominal) and the config's per-bin minimum.
FeatureSpec make_spec(std::string name, FeatureKind kind, const R2vfConfig& config);

/// Per nominal feature: category -> ranking score. The reference scores 0.
struct Ranking {
    std::map<std::string, std::map<std::string, double>> scores;
};

/// Per feature, levels in order grouped into contiguous clusters. Cluster 0
/// holds the reference (lowest) level; indices follow level order.
struct FeatureClusters {
    std::string feature;
    std::vector<std::string> levels;
    std::vector<std::size_t> cluster_of_level;
    std::vector<double> coefficients;                // one per cluster
    std::vector<std::vector<std::string>> members;   // bins or categories, one list per cluster

    std::size_t cluster_count() const { return coefficients.size(); }
};

struct ClusterMap {
    std::vector<FeatureClusters> features;

    const FeatureClusters& at(const std::string& feature) const;
    bool contains(const std::string& feature) const;
};

/// Training rows used for fitting and the validation rows shared by every lambda search.
struct SplitData {
    Dataset train;
    Dataset valid;

    Dataset combined() const;
};

SplitData carve_validation(const Dataset& data, double fraction, std::uint64_t seed);

/// Steps 1-2: percentile bins (split-coded, lowest bin as reference) for ordered
/// features and one-hot for nominal ones. Constant features are dropped.
struct InitialEncoding {
    std::vector<FeatureEncoding> encodings;
    std::vector<std::string> dropped;
};
InitialEncoding initial_encodings(const Dataset& train, std::span<const FeatureSpec> specs, const R2vfConfig& config);

struct RankResult {
    GlmModel model;
    FitReport report;
    Ranking ranking;
    std::vector<FeatureEncoding> encodings;
    std::vector<std::string> dropped;
};

/// Step 3: regularized fit with fusion on ordered features and a standard
/// penalty on nominal ones, then read category scores off the one-hot coefficients.
RankResult step3_rank(const SplitData& data, std::span<const FeatureSpec> specs, const R2vfConfig& config);

struct OrdinalizeResult {
    std::map<std::string, BinningScheme> schemes;
    std::vector<std::string> dropped;
};

struct BinLimits {
    int max_bins;
    int min_obs;
};

/// Step 4: replace each nominal column by its scores and bin it with the
/// feature's percentile-bin limits.
OrdinalizeResult step4_ordinalize(const Dataset& train, const Ranking& ranking,
                                  const std::map<std::string, BinLimits>& limits);
OrdinalizeResult step4_ordinalize(const Dataset& train, const Ranking& ranking, int m, int min_obs);

struct FuseResult {
    GlmModel model;
    FitReport report;
    std::vector<FeatureEncoding> encodings;
};

/// Steps 5-6: keep the ordered encodings of Step 3, swap each ranked nominal for
/// its score bins (dropping the ones Step 4 dropped), split-code everything and
/// run an l1 lambda search on the deltas.
FuseResult step6_fuse(const SplitData& data, std::span<const FeatureEncoding> step3_encodings,
                      const Ranking& ranking, const OrdinalizeResult& ordinal, const R2vfConfig& config);

/// Runs of exactly-zero deltas merge adjacent levels.
ClusterMap extract_clusters(const GlmModel& model);

struct RefitResult {
    GlmModel model;
    std::vector<FeatureEncoding> encodings;
};

/// Step 7: one-hot over non-reference clusters, unpenalized. Throws
/// RankDeficientError when the cluster design is not of full column rank.
RefitResult step7_refit(const Dataset& data, std::span<const FeatureEncoding> fused_encodings,
                        const ClusterMap& clusters, Family family, const FitOptions& options = {});

/// Encoders plus a GLM over their design: everything needed to score raw rows.
struct R2vfModel {
    std::vector<FeatureSpec> specs;
    std::vector<FeatureEncoding> encodings;
    GlmModel glm;

    std::vector<double> predict(const Dataset& data, std::size_t* unseen = nullptr) const;
    std::size_t covariate_count() const { return glm.nonzero_count(); }
};

struct R2vfResult {
    R2vfModel model;
    ClusterMap clusters;
    Ranking ranking;
    FitReport rank_report;
    FitReport fuse_report;
    std::map<std::string, BinningScheme> ordinal_schemes;
    std::vector<std::string> dropped;
    std::vector<std::string> warnings;
    bool refit_applied = false;
    std::vector<std::size_t> train_rows;  // row ids of the fitting rows
    std::vector<std::size_t> valid_rows;  // row ids of the validation rows
};

/// Steps 1-7. Returns the refit model when config.refit holds (falling back to
/// the fused model if the cluster design is rank deficient), else the fused model.
R2vfResult run_r2vf(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config);

/// Runs through Step 4 only.
struct RankOnlyResult {
    Ranking ranking;
    OrdinalizeResult ordinal;
    FitReport report;
};
RankOnlyResult run_ranking(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config);

struct BaselineResult {
    R2vfModel model;
    FitReport report;
};

/// Ordinary lasso on one-hot nominal features plus fusion on ordered ones.
BaselineResult fit_olvf(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config);

/// Initial bins and categories as one-hot covariates, no penalty, fitted on all rows.
BaselineResult fit_unregularized(const Dataset& data, std::span<const FeatureSpec> specs, const R2vfConfig& config);

}  // namespace r2vf
