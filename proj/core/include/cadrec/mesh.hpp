#pragma once

// Isosurface extraction from solid occupancy (marching cubes with edge
// bisection against the exact occupancy test) and ASCII OBJ export.

#include <array>
#include <string>
#include <vector>

#include "cadrec/solid.hpp"
#include "cadrec/vec.hpp"

namespace cadrec {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};

// Surface of the occupancy field sampled at `voxel_res` cells along the
// longest axis, crossings refined by bisection. Throws EmptySolidError.
TriMesh extract_isosurface(const Solid& solid, int voxel_res = 128);

void save_obj(const std::string& path, const TriMesh& mesh,
              const std::vector<std::string>& comments = {});

// Signed volume by the divergence theorem; positive for outward-oriented
// closed surfaces.
double mesh_volume(const TriMesh& mesh);

// V - E + F over unique undirected edges.
int euler_characteristic(const TriMesh& mesh);

}  // namespace cadrec
