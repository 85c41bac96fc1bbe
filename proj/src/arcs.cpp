#include "pmlab/arcs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pmlab {

ArcSet::ArcSet(std::vector<Arc> arcs) {
    for (const Arc& a : arcs) {
        if (!(a.lo >= 0.0 && a.hi <= 1.0 && a.lo <= a.hi)) {
            throw std::invalid_argument("arc endpoints must satisfy 0 <= lo <= hi <= 1");
        }
    }
    std::erase_if(arcs, [](const Arc& a) { return !(a.hi > a.lo); });
    std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });
    for (const Arc& a : arcs) {
        if (!arcs_.empty() && a.lo <= arcs_.back().hi) {
            arcs_.back().hi = std::max(arcs_.back().hi, a.hi);
        } else {
            arcs_.push_back(a);
        }
    }
}

ArcSet ArcSet::from_circle_arc(double start, double length) {
    if (!(length >= 0.0)) throw std::invalid_argument("arc length must be nonnegative");
    if (length >= 1.0) return full_circle();
    start -= std::floor(start);
    const double end = start + length;
    if (end <= 1.0) return ArcSet({Arc{start, end}});
    return ArcSet({Arc{start, 1.0}, Arc{0.0, end - 1.0}});
}

double ArcSet::total_length() const noexcept {
    double s = 0.0;
    for (const Arc& a : arcs_) s += a.length();
    return s;
}

bool ArcSet::is_full() const noexcept {
    return arcs_.size() == 1 && arcs_.front().lo == 0.0 && arcs_.front().hi == 1.0;
}

bool ArcSet::contains(double x) const noexcept {
    x -= std::floor(x);
    return std::any_of(arcs_.begin(), arcs_.end(),
                       [x](const Arc& a) { return a.lo <= x && x < a.hi; });
}

ArcSet push_arc(const MapParam& map, const ArcSet& arcs) {
    std::vector<Arc> image;
    image.reserve(2 * arcs.arcs().size());
    for (const Arc& a : arcs.arcs()) {
        if (a.lo < kBranchPoint) {
            const bool crosses = a.hi >= kBranchPoint;
            const double hi = crosses ? 1.0 : eval_map(map, a.hi);
            image.push_back(Arc{eval_map(map, a.lo), hi});
        }
        if (a.hi > kBranchPoint) {
            const double lo = a.lo <= kBranchPoint ? 0.0 : 3.0 * a.lo - 2.0;
            image.push_back(Arc{lo, 3.0 * a.hi - 2.0});
        }
    }
    return ArcSet(std::move(image));
}

} // namespace pmlab
