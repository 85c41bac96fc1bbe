#pragma once

// Two-branch intermittent map family on the circle [0,1) and its inverse
// branches.
//
//   T_beta(x) = x + c_beta x^(1+beta)   0 <= x <= 2/3,  c_beta = 3^beta / 2^(1+beta)
//   T_beta(x) = 3x - 2                  2/3 <  x <= 1
//
// beta = 0 gives the piecewise-affine map with slopes 3/2 and 3.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pmlab {

enum class Branch { left, right };

inline constexpr double kBranchPoint = 2.0 / 3.0;

/// Exponent cap shared by every map of a sequence; 0 < alpha < 1.
class FamilyConfig {
public:
    explicit FamilyConfig(double alpha);
    [[nodiscard]] double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Exponent of one map, 0 <= beta.  The upper bound beta <= alpha is a
/// property of a sequence and is checked there.
class MapParam {
public:
    explicit MapParam(double beta);
    [[nodiscard]] double beta() const noexcept { return beta_; }
    /// c_beta = 3^beta / 2^(1+beta), so that c_beta (2/3)^(1+beta) = 1/3.
    [[nodiscard]] double coefficient() const noexcept { return coef_; }

private:
    double beta_;
    double coef_;
};

[[nodiscard]] double eval_map(const MapParam& map, double x);

/// One-sided at x = 2/3: the left-branch value 1 + (1+beta)/2 is returned.
[[nodiscard]] double eval_deriv(const MapParam& map, double x);

/// Second derivative (left branch only; zero on the affine branch).
[[nodiscard]] double eval_second_deriv(const MapParam& map, double x);

/// Inverse of one branch.  The right branch is closed form; the left branch is
/// solved by Newton iteration started at x0 = min(y, 2/3), which decreases
/// monotonically to the root because the branch is increasing and convex.
/// A bisection fallback guards the bracket [0, min(y, 2/3)].
[[nodiscard]] double invert_branch(const MapParam& map, double y, Branch branch);

enum class SequencePolicy { constant, uniform_random, explicit_list };

/// "constant", "uniform-random", "explicit-list".
[[nodiscard]] const char* policy_name(SequencePolicy policy);
/// Inverse of policy_name; throws std::invalid_argument for unknown names.
[[nodiscard]] SequencePolicy parse_policy(std::string_view name);

/// Reproducible finite sequence beta_1 ... beta_n in [0, alpha].
///
/// Index convention: betas()[k] is beta_{k+1}, i.e. the map applied at time
/// k+1.
class MapSequence {
public:
    /// beta_k = beta for every k.
    static MapSequence constant(double alpha, double beta, std::size_t length);
    /// beta_k uniform in (beta_min, alpha], drawn from a 64-bit Mersenne
    /// twister seeded with `seed`.
    static MapSequence uniform_random(double alpha, double beta_min, std::uint64_t seed,
                                      std::size_t length);
    static MapSequence explicit_list(double alpha, std::vector<double> betas);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] SequencePolicy policy() const noexcept { return policy_; }
    [[nodiscard]] double beta_min() const noexcept { return beta_min_; }
    [[nodiscard]] std::size_t size() const noexcept { return maps_.size(); }
    [[nodiscard]] std::span<const MapParam> maps() const noexcept { return maps_; }
    [[nodiscard]] const MapParam& operator[](std::size_t k) const { return maps_.at(k); }

    /// Maps k, k+1, ..., k+count-1; throws std::out_of_range past the end.
    [[nodiscard]] std::span<const MapParam> window(std::size_t k, std::size_t count) const;

private:
    MapSequence(double alpha, SequencePolicy policy, std::uint64_t seed, double beta_min,
                std::vector<MapParam> maps);

    double alpha_;
    SequencePolicy policy_;
    std::uint64_t seed_;
    double beta_min_;
    std::vector<MapParam> maps_;
};

/// a_0^k = 1, a_n^k = leftmost preimage of 1 under T_{k+n} o ... o T_{k+1}.
struct PreimageLadder {
    std::size_t k = 0;
    std::vector<double> values;
};

/// Ladder a_0^k .. a_n^k along a sequence.  a_n^k = L_{k+1}^{-1}(a_{n-1}^{k+1})
/// so each entry is rebuilt from 1 through the innermost map; O(n^2) inversions.
[[nodiscard]] PreimageLadder preimage_ladder(const MapSequence& seq, std::size_t k, std::size_t n);

/// Ladder of a single map iterated n times; O(n).
[[nodiscard]] PreimageLadder preimage_ladder(const MapParam& map, std::size_t n);

} // namespace pmlab
