#pragma once

#include <cmath>

#include "evcoord/errors.hpp"

namespace evcoord {

// Discrete simulation window. Times are minutes since midnight of day 0; a
// window that crosses midnight carries its end on day 1 (end_min > 1440).
struct Horizon {
  int start_min = 17 * 60;  // 17:00
  int end_min = 34 * 60;    // 10:00 next day
  int slot_minutes = 30;

  int n_slots() const { return (end_min - start_min) / slot_minutes; }
  double slot_hours() const { return slot_minutes / 60.0; }
  double slot_start_min(int slot) const { return start_min + slot * static_cast<double>(slot_minutes); }

  // First slot that starts at or after t: charging can begin there.
  int arrival_slot(double t_min) const {
    return static_cast<int>(std::ceil((t_min - start_min) / slot_minutes));
  }
  // Number of whole slots that end by t: charging must stop there (exclusive).
  int departure_slot(double t_min) const {
    return static_cast<int>(std::floor((t_min - start_min) / slot_minutes));
  }

  void validate() const {
    if (slot_minutes <= 0) throw ConfigError("horizon: slot_minutes must be positive");
    if (end_min <= start_min) throw ConfigError("horizon: empty window");
    if ((end_min - start_min) % slot_minutes != 0)
      throw ConfigError("horizon: window is not a whole number of slots");
  }
};

}  // namespace evcoord
