#include "pmlab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace pmlab {

double a_min(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::domain_error("a_min: alpha must satisfy 0 < alpha < 1");
    }
    return std::pow(2.0, alpha) * (2.0 + alpha) / (1.0 - alpha);
}

ConeParams::ConeParams(double alpha) : ConeParams(alpha, a_min(alpha)) {}

ConeParams::ConeParams(double alpha, double a) : alpha_(alpha), a_(a), c3_(0.0) {
    const double lower = a_min(alpha);
    if (!(a >= lower * (1.0 - 1e-14))) {
        throw std::domain_error("cone constant a = " + std::to_string(a) +
                                " is below 2^alpha (2+alpha)/(1-alpha) = " +
                                std::to_string(lower));
    }
    const double power = std::pow(alpha * (1.0 + alpha) / std::pow(a, alpha), 1.0 / (1.0 - alpha));
    branch_ = power < a ? C3Branch::power_expression : C3Branch::cone_constant;
    c3_ = std::min(a, power);
}

double c3_bound(const ConeParams& cone) { return cone.c3(); }

namespace {

class ViolationLog {
public:
    void add(const char* check, std::size_t i, double x, double magnitude) {
        ++count_;
        auto [it, inserted] = worst_.try_emplace(check, ConeViolation{check, i, x, magnitude});
        if (!inserted && magnitude > it->second.magnitude) it->second = {check, i, x, magnitude};
    }

    ConeReport finish() && {
        ConeReport r;
        r.ok = count_ == 0;
        r.violation_count = count_;
        for (auto& [k, v] : worst_) r.violations.push_back(std::move(v));
        std::sort(r.violations.begin(), r.violations.end(),
                  [](const ConeViolation& a, const ConeViolation& b) {
                      return a.magnitude > b.magnitude;
                  });
        return r;
    }

private:
    std::size_t count_ = 0;
    std::map<std::string, ConeViolation> worst_;
};

// Tolerances are absolute below 1 and relative above.
double slack(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

void check_c1(const ConeDensity& f, double tol, ViolationLog& log) {
    const auto x = f.mesh().x();
    const auto h = f.h();
    const std::size_t n = h.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double fi = f.value_at_node(i);
        if (fi < -tol) log.add("nonnegative", i, x[i], -fi);
    }
    // f(0) is either +inf or the cell-0 limit f(x_1); the pair (0,1) is
    // satisfied in both cases.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double fi = f.value_at_node(i);
        const double rise = f.value_at_node(i + 1) - fi;
        if (rise > slack(tol, fi)) log.add("nonincreasing", i, x[i], rise);
    }
    // x^(alpha+1) f = x h.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gi = x[i] * h[i];
        const double drop = gi - x[i + 1] * h[i + 1];
        if (drop > slack(tol, gi)) log.add("weighted_nondecreasing", i, x[i], drop);
    }
}

} // namespace

ConeReport is_in_C1(const ConeDensity& f, double tol) {
    ViolationLog log;
    check_c1(f, tol, log);
    return std::move(log).finish();
}

ConeReport is_in_C2_with_mass(const ConeDensity& f, const ConeParams& cone, double claimed_mass,
                              double tol) {
    if (std::abs(f.mesh().alpha() - cone.alpha()) > 0.0) {
        throw std::invalid_argument("cone and density use different alpha");
    }
    ViolationLog log;
    check_c1(f, tol, log);
    const double bound = cone.a() * claimed_mass;
    const auto x = f.mesh().x();
    const auto h = f.h();
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double excess = h[i] - bound;
        if (excess > slack(tol, bound)) log.add("upper_bound", i, x[i], excess);
    }
    return std::move(log).finish();
}

ConeReport is_in_C2(const ConeDensity& f, const ConeParams& cone, double tol) {
    return is_in_C2_with_mass(f, cone, mass(f), tol);
}

void to_json(nlohmann::json& j, const ConeViolation& v) {
    j = nlohmann::json{{"check", v.check},
                       {"node_index", v.node_index},
                       {"x", v.x},
                       {"magnitude", v.magnitude}};
}

void to_json(nlohmann::json& j, const ConeReport& r) {
    j = nlohmann::json{
        {"ok", r.ok}, {"violation_count", r.violation_count}, {"violations", r.violations}};
}

} // namespace pmlab
