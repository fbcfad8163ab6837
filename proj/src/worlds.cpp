#include "gridloc/worlds.hpp"

#include <vector>

namespace gridloc {

namespace {

class Builder {
 public:
  Builder(int w, int h) : w_(w), h_(h), occ_(static_cast<std::size_t>(w) * h, 1) {}

  void carve(int i0, int j0, int i1, int j1) { paint(i0, j0, i1, j1, 0); }
  void fill(int i0, int j0, int i1, int j1) { paint(i0, j0, i1, j1, 1); }

  OccupancyMap build(double resolution = 0.1) {
    return OccupancyMap(w_, h_, resolution, occ_);
  }

 private:
  void paint(int i0, int j0, int i1, int j1, uint8_t v) {
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        occ_[static_cast<std::size_t>(j) * w_ + i] = v;
      }
    }
  }

  int w_, h_;
  std::vector<uint8_t> occ_;
};

}  // namespace

double twin_room_offset() { return 5.0; }  // 50 cells at 0.1 m

OccupancyMap make_twin_room_map() {
  // 94 x 56 cells. Corridor j in [4,9] along the top, alcove carved into the
  // wall band above it, rooms below. Room B is room A translated +50 cells.
  Builder b(94, 56);
  b.carve(2, 4, 91, 9);     // corridor
  b.carve(28, 1, 33, 3);    // alcove in the corridor's north wall, off-center
  b.carve(2, 14, 41, 53);   // room A
  b.carve(52, 14, 91, 53);  // room B
  b.carve(10, 10, 13, 13);  // door A (through the wall band j in [10,13])
  b.carve(60, 10, 63, 13);  // door B, same offset within its room
  return b.build();
}

OccupancyMap make_disconnected_twin_rooms() {
  Builder b(94, 46);
  b.carve(2, 3, 41, 42);
  b.carve(52, 3, 91, 42);
  return b.build();
}

OccupancyMap make_asymmetric_office_map() {
  Builder b(80, 60);
  b.carve(1, 1, 78, 58);
  // Sloped north wall of the first room; kills its rotational self-symmetry
  // for sparse scans.
  for (int i = 6; i <= 29; ++i) b.fill(i, 1, i, i / 6);
  // Partition walls with door gaps.
  b.fill(30, 1, 31, 24);   // vertical, upper half
  b.carve(30, 10, 31, 13); // door
  b.fill(1, 24, 55, 25);   // horizontal
  b.carve(8, 24, 11, 25);  // door
  b.carve(40, 24, 43, 25); // door
  b.fill(55, 24, 56, 58);  // vertical, lower half
  b.carve(55, 40, 56, 43); // door
  // Clutter: pillars of unequal size at irregular spots, plus an L-wall.
  b.fill(15, 40, 17, 41);
  b.fill(62, 12, 63, 13);
  b.fill(44, 48, 45, 50);
  b.fill(20, 8, 21, 8);
  b.fill(65, 32, 65, 44);
  b.fill(65, 44, 72, 45);
  return b.build();
}

OccupancyMap make_loop_corridor_map() {
  Builder b(60, 44);
  b.carve(2, 2, 57, 41);
  b.fill(12, 12, 47, 31);  // solid core leaves an 10-cell-wide ring
  return b.build();
}

OccupancyMap make_empty_room(int width, int height, double resolution) {
  Builder b(width, height);
  if (width > 2 && height > 2) b.carve(1, 1, width - 2, height - 2);
  return b.build(resolution);
}

}  // namespace gridloc
