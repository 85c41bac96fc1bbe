#include "pmlab/map_core.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace pmlab {

namespace {

void check_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error(std::string(what) + ": argument " + std::to_string(x) +
                                " outside [0,1]");
    }
}

double left_newton(double beta, double c, double y) {
    const double upper = std::min(y, kBranchPoint);
    double x = upper;
    for (int it = 0; it < 64; ++it) {
        const double xb = std::pow(x, beta);
        const double g = x + c * xb * x - y;
        if (g <= 0.0) return x;
        const double next = x - g / (1.0 + (1.0 + beta) * c * xb);
        // Monotone from the right: a non-decreasing iterate means convergence.
        if (!(next < x)) return x;
        if (next < 0.0) break;
        x = next;
    }
    // Bisection fallback over [0, upper].
    double lo = 0.0;
    double hi = upper;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double g = mid + c * std::pow(mid, 1.0 + beta) - y;
        (g > 0.0 ? hi : lo) = mid;
    }
    return hi;
}

} // namespace

FamilyConfig::FamilyConfig(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("alpha must satisfy 0 < alpha < 1, got " + std::to_string(alpha));
    }
}

MapParam::MapParam(double beta) : beta_(beta), coef_(0.0) {
    if (!(beta >= 0.0 && beta < 1.0)) {
        throw std::domain_error("beta must satisfy 0 <= beta < 1, got " + std::to_string(beta));
    }
    coef_ = std::pow(3.0, beta) / std::pow(2.0, 1.0 + beta);
}

double eval_map(const MapParam& map, double x) {
    check_unit_interval(x, "eval_map");
    if (x == kBranchPoint) return 1.0;
    if (x < kBranchPoint) return x + map.coefficient() * std::pow(x, 1.0 + map.beta());
    return 3.0 * x - 2.0;
}

double eval_deriv(const MapParam& map, double x) {
    check_unit_interval(x, "eval_deriv");
    if (x <= kBranchPoint) {
        if (x == 0.0) return 1.0;
        return 1.0 + (1.0 + map.beta()) * map.coefficient() * std::pow(x, map.beta());
    }
    return 3.0;
}

double eval_second_deriv(const MapParam& map, double x) {
    check_unit_interval(x, "eval_second_deriv");
    if (x <= kBranchPoint && map.beta() > 0.0) {
        if (x == 0.0) return map.beta() < 1.0 ? INFINITY : 0.0;
        const double b = map.beta();
        return b * (1.0 + b) * map.coefficient() * std::pow(x, b - 1.0);
    }
    return 0.0;
}

double invert_branch(const MapParam& map, double y, Branch branch) {
    check_unit_interval(y, "invert_branch");
    if (branch == Branch::right) return (y + 2.0) / 3.0;
    if (y == 0.0) return 0.0;
    if (y == 1.0) return kBranchPoint;
    return left_newton(map.beta(), map.coefficient(), y);
}

// ---------------------------------------------------------------------------

MapSequence::MapSequence(double alpha, SequencePolicy policy, std::uint64_t seed, double beta_min,
                         std::vector<MapParam> maps)
    : alpha_(FamilyConfig(alpha).alpha()),
      policy_(policy),
      seed_(seed),
      beta_min_(beta_min),
      maps_(std::move(maps)) {
    for (std::size_t k = 0; k < maps_.size(); ++k) {
        if (maps_[k].beta() > alpha_) {
            throw std::domain_error("beta_" + std::to_string(k + 1) + " = " +
                                    std::to_string(maps_[k].beta()) + " exceeds alpha");
        }
    }
}

MapSequence MapSequence::constant(double alpha, double beta, std::size_t length) {
    return MapSequence(alpha, SequencePolicy::constant, 0, beta,
                       std::vector<MapParam>(length, MapParam(beta)));
}

MapSequence MapSequence::uniform_random(double alpha, double beta_min, std::uint64_t seed,
                                        std::size_t length) {
    if (!(beta_min >= 0.0 && beta_min < alpha)) {
        throw std::domain_error("beta_min must satisfy 0 <= beta_min < alpha");
    }
    // Raw 53-bit draws keep the stream identical across standard libraries.
    std::mt19937_64 rng(seed);
    std::vector<MapParam> maps;
    maps.reserve(length);
    for (std::size_t k = 0; k < length; ++k) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0,1)
        maps.emplace_back(alpha - u * (alpha - beta_min));               // (beta_min, alpha]
    }
    return MapSequence(alpha, SequencePolicy::uniform_random, seed, beta_min, std::move(maps));
}

MapSequence MapSequence::explicit_list(double alpha, std::vector<double> betas) {
    std::vector<MapParam> maps;
    maps.reserve(betas.size());
    double lo = alpha;
    for (double b : betas) {
        maps.emplace_back(b);
        lo = std::min(lo, b);
    }
    return MapSequence(alpha, SequencePolicy::explicit_list, 0, lo, std::move(maps));
}

std::span<const MapParam> MapSequence::window(std::size_t k, std::size_t count) const {
    if (k > maps_.size() || count > maps_.size() - k) {
        throw std::out_of_range("map sequence of length " + std::to_string(maps_.size()) +
                                " has no window [" + std::to_string(k) + ", " +
                                std::to_string(k + count) + ")");
    }
    return std::span<const MapParam>(maps_).subspan(k, count);
}

// ---------------------------------------------------------------------------

PreimageLadder preimage_ladder(const MapSequence& seq, std::size_t k, std::size_t n) {
    if (n < 1) throw std::invalid_argument("preimage_ladder: n must be >= 1");
    const auto maps = seq.window(k, n);
    PreimageLadder ladder{k, std::vector<double>(n + 1)};
    ladder.values[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        double y = 1.0;
        for (std::size_t i = j; i-- > 0;) y = invert_branch(maps[i], y, Branch::left);
        ladder.values[j] = y;
    }
    return ladder;
}

PreimageLadder preimage_ladder(const MapParam& map, std::size_t n) {
    if (n < 1) throw std::invalid_argument("preimage_ladder: n must be >= 1");
    PreimageLadder ladder{0, std::vector<double>(n + 1)};
    ladder.values[0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
        ladder.values[j] = invert_branch(map, ladder.values[j - 1], Branch::left);
    }
    return ladder;
}

const char* policy_name(SequencePolicy policy) {
    switch (policy) {
    case SequencePolicy::constant: return "constant";
    case SequencePolicy::uniform_random: return "uniform-random";
    case SequencePolicy::explicit_list: return "explicit-list";
    }
    return "unknown";
}

SequencePolicy parse_policy(std::string_view name) {
    if (name == "constant") return SequencePolicy::constant;
    if (name == "uniform-random" || name == "random") return SequencePolicy::uniform_random;
    if (name == "explicit-list" || name == "list") return SequencePolicy::explicit_list;
    throw std::invalid_argument("unknown sequence policy '" + std::string(name) +
                                "' (expected constant, uniform-random or explicit-list)");
}

} // namespace pmlab
