// Regenerates the synthetic floorplans shipped under maps/.
#include <cstdio>
#include <filesystem>

#include "gridloc/worlds.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "maps";
  std::filesystem::create_directories(dir);
  gridloc::write_pgm_file(gridloc::make_twin_room_map(), dir + "/twin_room.pgm");
  gridloc::write_pgm_file(gridloc::make_asymmetric_office_map(),
                          dir + "/office.pgm");
  gridloc::write_pgm_file(gridloc::make_loop_corridor_map(),
                          dir + "/loop_corridor.pgm");
  std::printf("wrote twin_room.pgm, office.pgm, loop_corridor.pgm to %s/\n",
              dir.c_str());
  return 0;
}
