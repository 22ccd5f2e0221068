#include "refute/intervals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace refute {

IntervalSet::IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) {
    normalize();
}

void IntervalSet::normalize() {
    std::erase_if(parts_, [](const Interval& iv) { return !(iv.lo <= iv.hi); });
    std::sort(parts_.begin(), parts_.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const auto& iv : parts_) {
        if (!merged.empty() && iv.lo <= merged.back().hi) {
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        } else {
            merged.push_back(iv);
        }
    }
    parts_ = std::move(merged);
}

bool IntervalSet::contains(double y) const {
    // first interval with lo > y, then step back one
    auto it = std::upper_bound(parts_.begin(), parts_.end(), y,
                               [](double v, const Interval& iv) { return v < iv.lo; });
    if (it == parts_.begin()) return false;
    --it;
    return y <= it->hi;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all = parts_;
    all.insert(all.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < parts_.size() && j < other.parts_.size()) {
        double lo = std::max(parts_[i].lo, other.parts_[j].lo);
        double hi = std::min(parts_[i].hi, other.parts_[j].hi);
        if (lo <= hi) out.push_back({lo, hi});
        if (parts_[i].hi < other.parts_[j].hi) ++i; else ++j;
    }
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::shifted(double c) const {
    std::vector<Interval> out;
    for (const auto& iv : parts_) out.push_back({iv.lo + c, iv.hi + c});
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::scaled(double lambda) const {
    std::vector<Interval> out;
    for (const auto& iv : parts_) out.push_back({iv.lo * lambda, iv.hi * lambda});
    return IntervalSet(std::move(out));
}

double IntervalSet::length_within(double lo, double hi) const {
    double total = 0.0;
    for (const auto& iv : parts_) {
        double a = std::max(iv.lo, lo), b = std::min(iv.hi, hi);
        if (a < b) total += b - a;
    }
    return total;
}

std::string IntervalSet::str() const {
    if (parts_.empty()) return "{}";
    std::ostringstream os;
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (k) os << " U ";
        os << '[' << parts_[k].lo << ", " << parts_[k].hi << ']';
    }
    return os.str();
}

}  // namespace refute
