#pragma once

// Point cloud container with optional unit normals and binary mask labels,
// plus ASCII PLY (x y z [nx ny nz]) and XYZ readers/writers.

#include <cstdint>
#include <string>
#include <vector>

#include "cadrec/vec.hpp"

namespace cadrec {

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;     // empty, or one per point
  std::vector<std::uint8_t> mask;  // empty, or one per point

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_normals() const { return normals.size() == positions.size() && !positions.empty(); }
  bool has_mask() const { return mask.size() == positions.size() && !positions.empty(); }

  Aabb3 bounds() const {
    Aabb3 b;
    for (const Vec3& p : positions) b.expand(p);
    return b;
  }

  void append(const Vec3& p) { positions.push_back(p); }
  void append(const Vec3& p, const Vec3& n) {
    positions.push_back(p);
    normals.push_back(n);
  }
};

// `comments` lines are embedded in the PLY header (one per entry).
void save_ply(const std::string& path, const PointCloud& cloud,
              const std::vector<std::string>& comments = {});
PointCloud load_ply(const std::string& path);

void save_xyz(const std::string& path, const PointCloud& cloud);
PointCloud load_xyz(const std::string& path);

// Dispatches on extension (.ply / .xyz).
PointCloud load_cloud(const std::string& path);

}  // namespace cadrec
