#include <algorithm>
#include <cmath>
#include <random>

#include "r2vf/data.hpp"
#include "r2vf/error.hpp"

namespace r2vf {

void SynthConfig::validate() const {
    if (n_rows == 0) throw InputError("n_rows must be > 0");
    if (n_professions < 1) throw InputError("n_professions must be > 0");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw InputError("noise_sd must be finite and >= 0");
}

double city_effect(std::string_view city) {
    if (city.size() != 1) return 0.0;
    const char c = city.front();
    if (c >= 'b' && c <= 'd') return 15.0;
    if (c >= 'e' && c <= 'l') return 17.0;
    if (c >= 'm' && c <= 'p') return -12.0;
    if (c >= 'q' && c <= 'v') return -14.0;
    if (c == 'w' || c == 'x') return 10.0;
    if (c == 'y' || c == 'z') return -10.0;
    return 0.0;
}

double profession_effect(std::string_view profession) {
    static constexpr double by_digit[10] = {0.0, -19.0, -17.0, -9.0, -8.0, 1.0, 2.0, 8.0, 9.0, 19.0};
    if (profession.empty()) return 0.0;
    const char last = profession.back();
    if (last < '0' || last > '9') return 0.0;
    return by_digit[last - '0'];
}

double age_effect(double age) { return -2.0 * std::abs(age - 45.0); }

namespace {

constexpr int kCities = 26;
constexpr int kAgeBands = 10;
constexpr double kZipfExponent = 1.1;
constexpr double kTilt = 1.0;  // peak multiplier of the city/age mode

int age_band(double age) { return std::clamp(static_cast<int>(std::floor(age / 10.0)), 0, kAgeBands - 1); }

}  // namespace

Dataset generate(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const auto n_prof = static_cast<std::size_t>(config.n_professions);

    std::vector<double> city_weight(kCities);
    for (int k = 0; k < kCities; ++k) city_weight[static_cast<std::size_t>(k)] = k + 1;
    std::discrete_distribution<int> city_dist(city_weight.begin(), city_weight.end());

    std::uniform_real_distribution<double> mean_age_dist(34.0, 46.0);
    std::vector<double> city_mean_age(kCities);
    for (auto& a : city_mean_age) a = mean_age_dist(rng);

    std::vector<std::size_t> popularity_rank(n_prof);
    for (std::size_t i = 0; i < n_prof; ++i) popularity_rank[i] = i;
    std::shuffle(popularity_rank.begin(), popularity_rank.end(), rng);

    // One profession distribution per (city, age band).
    const double spread = std::max(1.0, static_cast<double>(n_prof) / 10.0);
    std::vector<std::discrete_distribution<std::size_t>> prof_dist;
    prof_dist.reserve(kCities * kAgeBands);
    std::vector<double> w(n_prof);
    for (int c = 0; c < kCities; ++c) {
        for (int b = 0; b < kAgeBands; ++b) {
            const double mode = static_cast<double>(n_prof - 1) *
                                (0.5 * c / (kCities - 1.0) + 0.5 * b / (kAgeBands - 1.0));
            for (std::size_t i = 0; i < n_prof; ++i) {
                const double base = std::pow(static_cast<double>(popularity_rank[i] + 1), -kZipfExponent);
                const double d = (static_cast<double>(i) - mode) / spread;
                w[i] = base * (1.0 + kTilt * std::exp(-0.5 * d * d));
            }
            prof_dist.emplace_back(w.begin(), w.end());
        }
    }

    std::normal_distribution<double> unit_normal(0.0, 1.0);
    Dataset data;
    data.target_name = "target";
    Column city{"city", FeatureKind::nominal, {}, {}};
    Column age{"age", FeatureKind::numeric, {}, {}};
    Column profession{"profession", FeatureKind::nominal, {}, {}};
    city.labels.reserve(config.n_rows);
    age.numbers.reserve(config.n_rows);
    profession.labels.reserve(config.n_rows);
    data.target.reserve(config.n_rows);
    for (std::size_t r = 0; r < config.n_rows; ++r) {
        const int c = city_dist(rng);
        const double a = city_mean_age[static_cast<std::size_t>(c)] + 13.0 * unit_normal(rng);
        const std::size_t p = prof_dist[static_cast<std::size_t>(c * kAgeBands + age_band(a))](rng);
        const double noise = unit_normal(rng);

        std::string city_label(1, static_cast<char>('a' + c));
        std::string prof_label = "P" + std::to_string(p);
        data.target.push_back(city_effect(city_label) + age_effect(a) + profession_effect(prof_label) +
                              config.noise_sd * noise);
        city.labels.push_back(std::move(city_label));
        age.numbers.push_back(a);
        profession.labels.push_back(std::move(prof_label));
    }
    data.columns = {std::move(city), std::move(age), std::move(profession)};
    data.row_ids.resize(config.n_rows);
    for (std::size_t r = 0; r < config.n_rows; ++r) data.row_ids[r] = r;
    return data;
}

std::vector<FeatureSpec> synthetic_specs(const R2vfConfig& config) {
    return {make_spec("city", FeatureKind::nominal, config), make_spec("age", FeatureKind::numeric, config),
            make_spec("profession", FeatureKind::nominal, config)};
}

}  // namespace r2vf
