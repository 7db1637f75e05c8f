#pragma once

// Exact 3D nearest-neighbor index (median-split k-d tree over an index
// array). Queries are read-only and safe to run concurrently.

#include <cstdint>
#include <span>
#include <vector>

#include "cadrec/vec.hpp"

namespace cadrec {

class KdTree3 {
 public:
  KdTree3() = default;
  explicit KdTree3(std::span<const Vec3> points) { build(points); }

  void build(std::span<const Vec3> points);

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  struct Hit {
    int index = -1;
    double dist2 = 0.0;
  };

  // Nearest neighbor; index -1 on an empty tree.
  Hit nearest(const Vec3& q) const;

  // Indices of all points within `radius` of q (unordered).
  void radius_search(const Vec3& q, double radius, std::vector<int>& out) const;

  const Vec3& point(int i) const { return points_[i]; }

 private:
  struct Node {
    int axis = -1;       // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    int begin = 0;       // leaf range into order_
    int end = 0;
  };

  int build_node(int begin, int end, const Aabb3& box);
  void nearest_rec(int node, const Vec3& q, Hit& best) const;
  void radius_rec(int node, const Vec3& q, double r2, std::vector<int>& out) const;

  static constexpr int kLeafSize = 12;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace cadrec
