// Level labels and the fixed basis ordering for the 9-level electron-nuclear
// register (electron spin S = 1, nitrogen nuclear spin I = 1).
//
// All population vectors and matrices in this library use the index order
//   0:|0,+1>  1:|0,-1>  2:|0,0>
//   3:|-1,-1> 4:|-1,+1> 5:|-1,0>
//   6:|+1,+1> 7:|+1,-1> 8:|+1,0>
// where a label |ms,mi> gives the electron and nuclear projections.
#pragma once

#include <array>
#include <iosfwd>
#include <string>

namespace nvpol {

inline constexpr int kLevels = 9;

struct LevelLabel {
  int ms = 0;  // electron projection: -1, 0, +1
  int mi = 0;  // nuclear projection:  -1, 0, +1

  friend constexpr bool operator==(LevelLabel a, LevelLabel b) {
    return a.ms == b.ms && a.mi == b.mi;
  }
  friend constexpr bool operator!=(LevelLabel a, LevelLabel b) {
    return !(a == b);
  }
};

inline constexpr std::array<LevelLabel, kLevels> kBasis = {{
    {0, +1}, {0, -1}, {0, 0},
    {-1, -1}, {-1, +1}, {-1, 0},
    {+1, +1}, {+1, -1}, {+1, 0},
}};

// Index of a label in kBasis. Throws std::invalid_argument for projections
// outside {-1,0,+1}.
int level_index(LevelLabel label);

// Label at a basis index. Throws std::out_of_range unless 0 <= index < 9.
LevelLabel level_at(int index);

// "|ms,mi>" with explicit signs, e.g. "|0,+1>" or "|-1,0>".
std::string to_string(LevelLabel label);

std::ostream& operator<<(std::ostream& os, LevelLabel label);

}  // namespace nvpol
