#include "ldis/event_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ldis/errors.hpp"

namespace ldis {

EventSet::EventSet(std::vector<Interval> pieces) {
  for (const auto& iv : pieces) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo < iv.hi)) {
      throw DomainError("EventSet: every interval needs lo < hi");
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const auto& iv : pieces) {
    if (!pieces_.empty() && iv.lo <= pieces_.back().hi) {
      pieces_.back().hi = std::max(pieces_.back().hi, iv.hi);
    } else {
      pieces_.push_back(iv);
    }
  }
}

EventSet EventSet::whole_line() { return EventSet({{-kInf, kInf}}); }
EventSet EventSet::at_least(double b) { return EventSet({{b, kInf}}); }
EventSet EventSet::at_most(double b) { return EventSet({{-kInf, b}}); }
EventSet EventSet::two_sided(double a, double b) { return EventSet({{-kInf, -b}, {a, kInf}}); }

bool EventSet::contains(double x) const {
  for (const auto& iv : pieces_) {
    if (x >= iv.lo && x <= iv.hi) return true;
  }
  return false;
}

bool EventSet::subset_of(const EventSet& other) const {
  for (const auto& iv : pieces_) {
    bool covered = false;
    for (const auto& ov : other.pieces_) {
      if (ov.lo <= iv.lo && iv.hi <= ov.hi) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

EventSet EventSet::intersect(Interval iv) const {
  std::vector<Interval> out;
  for (const auto& p : pieces_) {
    const double lo = std::max(p.lo, iv.lo);
    const double hi = std::min(p.hi, iv.hi);
    if (lo < hi) out.push_back({lo, hi});
  }
  return EventSet(std::move(out));
}

EventSet EventSet::intersect(const EventSet& other) const {
  std::vector<Interval> out;
  for (const auto& iv : other.pieces_) {
    for (const auto& p : intersect(iv).pieces_) out.push_back(p);
  }
  return EventSet(std::move(out));
}

std::string EventSet::to_string() const {
  std::ostringstream os;
  os.precision(17);
  if (pieces_.empty()) return "{}";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (i) os << " u ";
    os << "[" << pieces_[i].lo << ", " << pieces_[i].hi << "]";
  }
  return os.str();
}

}  // namespace ldis
