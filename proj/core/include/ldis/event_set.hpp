#pragma once

#include <string>
#include <vector>

#include "ldis/distributions.hpp"

namespace ldis {

struct Interval {
  double lo;
  double hi;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Finite union of disjoint closed intervals, sorted ascending. Endpoints may be
// infinite. Construction normalizes: sorts, merges overlapping or touching pieces.
class EventSet {
 public:
  EventSet() = default;
  explicit EventSet(std::vector<Interval> pieces);

  static EventSet whole_line();
  static EventSet at_least(double b);
  static EventSet at_most(double b);
  // {x >= a} ∪ {x <= -b}
  static EventSet two_sided(double a, double b);

  const std::vector<Interval>& intervals() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  bool contains(double x) const;
  bool subset_of(const EventSet& other) const;

  EventSet intersect(const EventSet& other) const;
  EventSet intersect(Interval iv) const;

  std::string to_string() const;

  friend bool operator==(const EventSet&, const EventSet&) = default;

 private:
  std::vector<Interval> pieces_;
};

}  // namespace ldis
