#pragma once

#include <limits>
#include <string>
#include <vector>

namespace refute {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lo;
    double hi;  // closed [lo, hi]; lo may be -inf, hi may be +inf
};

// Finite union of disjoint closed intervals kept in sorted order.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts);

    static IntervalSet all() { return IntervalSet({{-kInf, kInf}}); }

    bool contains(double y) const;
    bool empty() const { return parts_.empty(); }
    const std::vector<Interval>& parts() const { return parts_; }

    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet shifted(double c) const;
    IntervalSet scaled(double lambda) const;  // lambda > 0

    // Lebesgue length of the part inside [lo, hi].
    double length_within(double lo, double hi) const;

    std::string str() const;

private:
    void normalize();
    std::vector<Interval> parts_;
};

}  // namespace refute
