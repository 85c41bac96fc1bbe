#pragma once

namespace pmlab {

/// Smallest cone constant for which every P_beta, beta <= alpha, maps C2 into
/// itself: 2^alpha (2 + alpha) / (1 - alpha).
[[nodiscard]] double a_min(double alpha);

/// Which term of min{a, [alpha(1+alpha)/a^alpha]^(1/(1-alpha))} is active.
enum class C3Branch { cone_constant, power_expression };

/// (alpha, a) with the derived lower bound c3 on inf f / m(f) over C2.
class ConeParams {
public:
    /// a defaults to a_min(alpha); throws std::domain_error if a < a_min(alpha).
    explicit ConeParams(double alpha);
    ConeParams(double alpha, double a);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double c3() const noexcept { return c3_; }
    [[nodiscard]] C3Branch c3_branch() const noexcept { return branch_; }

private:
    double alpha_;
    double a_;
    double c3_;
    C3Branch branch_;
};

[[nodiscard]] double c3_bound(const ConeParams& cone);

} // namespace pmlab
