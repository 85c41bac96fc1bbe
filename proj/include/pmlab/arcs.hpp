#pragma once

#include "pmlab/map_core.hpp"

#include <vector>

namespace pmlab {

/// Half-open arc [lo, hi) with 0 <= lo < hi <= 1.
struct Arc {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] double length() const noexcept { return hi - lo; }
    friend bool operator==(const Arc&, const Arc&) = default;
};

/// Finite union of disjoint arcs of the circle, sorted by lo.  An arc through
/// 1 == 0 is stored as two entries [lo, 1) and [0, hi).
class ArcSet {
public:
    ArcSet() = default;
    /// Normalizes: drops empty arcs, sorts, merges overlapping or touching arcs.
    explicit ArcSet(std::vector<Arc> arcs);

    static ArcSet full_circle() { return ArcSet({Arc{0.0, 1.0}}); }
    /// Arc of the given length starting at `start` (taken mod 1), wrapped if needed.
    static ArcSet from_circle_arc(double start, double length);

    [[nodiscard]] const std::vector<Arc>& arcs() const noexcept { return arcs_; }
    [[nodiscard]] double total_length() const noexcept;
    [[nodiscard]] bool is_full() const noexcept;
    [[nodiscard]] bool contains(double x) const noexcept;

private:
    std::vector<Arc> arcs_;
};

/// Image of an arc set under T_beta.  Each arc is split at 2/3; the left piece
/// ends at T(2/3) = 1 and the right piece starts at 0.
[[nodiscard]] ArcSet push_arc(const MapParam& map, const ArcSet& arcs);

} // namespace pmlab
