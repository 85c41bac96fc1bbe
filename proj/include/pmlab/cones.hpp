#pragma once

// Membership tests for the cones
//
//   C1 = { f >= 0, f nonincreasing, x^(alpha+1) f nondecreasing }
//   C2 = { f in C1, f(x) <= a x^{-alpha} m(f) }
//
// evaluated at adjacent mesh nodes.  Monotonicity is non-strict: constants
// belong to C1.

#include "pmlab/cone_params.hpp"
#include "pmlab/density.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace pmlab {

struct ConeViolation {
    std::string check; // "nonnegative", "nonincreasing", "weighted_nondecreasing", "upper_bound"
    std::size_t node_index = 0;
    double x = 0.0;
    double magnitude = 0.0;
};

struct ConeReport {
    bool ok = true;
    /// Worst violation of each failed check, largest magnitude first.
    std::vector<ConeViolation> violations;
    std::size_t violation_count = 0;
};

[[nodiscard]] ConeReport is_in_C1(const ConeDensity& f, double tol);
[[nodiscard]] ConeReport is_in_C2(const ConeDensity& f, const ConeParams& cone, double tol);

/// Same as is_in_C2 with m(f) replaced by a caller-supplied value.
[[nodiscard]] ConeReport is_in_C2_with_mass(const ConeDensity& f, const ConeParams& cone,
                                            double claimed_mass, double tol);

void to_json(nlohmann::json& j, const ConeViolation& v);
void to_json(nlohmann::json& j, const ConeReport& r);

} // namespace pmlab
