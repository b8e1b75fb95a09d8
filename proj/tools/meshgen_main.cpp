// Writes the shipped phantom and stand-in structure meshes.

#include <filesystem>
#include <iostream>

#include "pbdsim/geometry/mesh.hpp"

using pbdsim::Vec3;
namespace geo = pbdsim::geometry;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: pbdsim_meshgen <output-dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  try {
    // Millimetres; scenarios load them with units_scale 0.001.
    auto box = geo::make_box_mesh({50.0, 17.5, 17.5});
    box.name = "phantom_box";
    geo::write_obj_file(dir / "phantom_box.obj", box);

    auto cube = geo::make_box_mesh({1.0, 1.0, 1.0});
    cube.name = "unit_cube";
    geo::write_obj_file(dir / "unit_cube.obj", cube);

    struct Blob {
      const char* name;
      Vec3 semi_axes, center;
    };
    // Disjoint ellipsoid stand-ins for the multi-structure scene and the
    // validation brain, in millimetres.
    const Blob blobs[] = {
        {"gyri", {20, 24, 24}, {-40, 0, 0}},       {"caudate", {9, 8, 8}, {-9, 0, 0}},
        {"thalamus", {11, 9, 9}, {14, 0, 0}},      {"putamen", {10, 7, 7}, {-5, 22, 0}},
        {"ventricle", {14, 7, 7}, {-5, -22, 0}},   {"brain_stem", {9, 9, 14}, {14, 0, -28}},
        {"ovine_brain", {30, 22, 18}, {0, 0, 0}},
    };
    for (const auto& b : blobs) {
      auto m = geo::make_ellipsoid_mesh(b.semi_axes, b.center, 3);
      m.name = b.name;
      geo::write_obj_file(dir / (std::string(b.name) + ".obj"), m);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
