#include <algorithm>

#include <Eigen/Dense>

#include "r2vf/error.hpp"
#include "r2vf/pipeline.hpp"

namespace r2vf {

const FeatureClusters& ClusterMap::at(const std::string& feature) const {
    for (const auto& f : features)
        if (f.feature == feature) return f;
    throw InputError("cluster map has no feature '" + feature + "'");
}

bool ClusterMap::contains(const std::string& feature) const {
    return std::any_of(features.begin(), features.end(), [&](const FeatureClusters& f) { return f.feature == feature; });
}

ClusterMap extract_clusters(const GlmModel& model) {
    ClusterMap map;
    for (const auto& block : model.blocks) {
        if (block.coding != Coding::split)
            throw InputError("extract_clusters: block '" + block.feature + "' is not split-coded");
        FeatureClusters fc;
        fc.feature = block.feature;
        fc.levels = block.levels;
        const std::span<const double> deltas(model.coefficients.data() + block.first_column, block.column_count());
        const auto betas = back_transform(deltas);

        fc.cluster_of_level.assign(block.levels.size(), 0);
        fc.coefficients = {0.0};
        fc.members.assign(1, {});
        for (std::size_t level = 0; level < block.levels.size(); ++level) {
            if (level > 0 && deltas[level - 1] != 0.0) {
                fc.coefficients.push_back(betas[level - 1]);
                fc.members.emplace_back();
            }
            fc.cluster_of_level[level] = fc.coefficients.size() - 1;
            const auto& lm = block.members.size() == block.levels.size() ? block.members[level]
                                                                           : std::vector<std::string>{block.levels[level]};
            fc.members.back().insert(fc.members.back().end(), lm.begin(), lm.end());
        }
        map.features.push_back(std::move(fc));
    }
    return map;
}

namespace {

// Column rank of [1, X] through its Gram matrix.
void require_full_rank(const EncodedDesign& design) {
    const std::size_t k = design.cols() + 1;
    if (design.rows() < k)
        throw RankDeficientError("cluster design has " + std::to_string(k) + " columns but only " +
                                 std::to_string(design.rows()) + " rows; skip the refit");
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < design.rows(); ++r) {
        const auto cols = design.x.row(r);
        gram(0, 0) += 1.0;
        for (auto a : cols) {
            gram(a + 1, 0) += 1.0;
            gram(0, a + 1) += 1.0;
            for (auto b : cols) gram(a + 1, b + 1) += 1.0;
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    qr.setThreshold(1e-10);
    if (static_cast<std::size_t>(qr.rank()) < k)
        throw RankDeficientError("cluster design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(k) +
                                 " columns; skip the refit and keep the fused model");
}

}  // namespace

RefitResult step7_refit(const Dataset& data, std::span<const FeatureEncoding> fused_encodings,
                        const ClusterMap& clusters, Family family, const FitOptions& options) {
    RefitResult out;
    for (const auto& enc : fused_encodings) {
        const auto& fc = clusters.at(enc.feature());
        if (fc.cluster_of_level.size() != enc.group_count())
            throw InputError("cluster map of '" + enc.feature() + "' does not match its encoding");
        // Compose level -> fused group -> cluster.
        std::vector<std::size_t> groups(enc.level_count());
        for (std::size_t l = 0; l < groups.size(); ++l) groups[l] = fc.cluster_of_level[enc.group_of_level()[l]];
        out.encodings.push_back(FeatureEncoding::grouped(enc, std::move(groups), Coding::one_hot, 0));
    }
    const auto design = encode_design(out.encodings, data);
    require_full_rank(design);
    out.model = fit(design, data.target, family, PenaltySpec::unpenalized(design.cols()), nullptr, options);
    return out;
}

}  // namespace r2vf
