#pragma once

#include "gridloc/occupancy_map.hpp"

namespace gridloc {

// Synthetic floorplans used by the experiments and tests. All are built at
// 0.1 m per cell unless stated otherwise.

// Two identical rooms (exact translated copies, including their door
// placement) joined by a corridor along the top. The corridor is the only
// asymmetric structure: its ends sit at different distances from the two
// doors and its north wall carries an off-center alcove. Scans taken inside
// either room are exactly ambiguous under a 5 m horizontal translation.
OccupancyMap make_twin_room_map();

// The translation, in meters, that maps a room-A pose onto its room-B twin.
double twin_room_offset();

// Twin rooms with no connecting corridor at all (both rooms closed).
OccupancyMap make_disconnected_twin_rooms();

// Cluttered 8 x 6 m office: four unequal zones, pillars and an L-shaped
// wall, with no repeated or rotated structure. Single-scan localization is
// nearly always unique here.
OccupancyMap make_asymmetric_office_map();

// Ring corridor around a solid core; rotationally repetitive on purpose.
OccupancyMap make_loop_corridor_map();

// Rectangular free interior with only the boundary occupied.
OccupancyMap make_empty_room(int width, int height, double resolution = 0.1);

}  // namespace gridloc
