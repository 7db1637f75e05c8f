#include "cadrec/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace cadrec {

void KdTree3::build(std::span<const Vec3> points) {
  points_.assign(points.begin(), points.end());
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.clear();
  nodes_.reserve(points_.empty() ? 0 : 2 * points_.size() / kLeafSize + 4);
  if (points_.empty()) {
    root_ = -1;
    return;
  }
  Aabb3 box;
  for (const Vec3& p : points_) box.expand(p);
  root_ = build_node(0, static_cast<int>(points_.size()), box);
}

int KdTree3::build_node(int begin, int end, const Aabb3& box) {
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 e = box.extent();
  int axis = 0;
  if (e.y > e.x) axis = 1;
  if (e.z > (axis == 0 ? e.x : e.y)) axis = 2;

  int mid = (begin + end) / 2;
  auto coord = [&](int idx) { return points_[idx][axis]; };
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return coord(a) < coord(b); });
  double split = coord(order_[mid]);

  Aabb3 left_box = box, right_box = box;
  if (axis == 0) { left_box.hi.x = split; right_box.lo.x = split; }
  if (axis == 1) { left_box.hi.y = split; right_box.lo.y = split; }
  if (axis == 2) { left_box.hi.z = split; right_box.lo.z = split; }

  int left = build_node(begin, mid, left_box);
  int right = build_node(mid, end, right_box);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

KdTree3::Hit KdTree3::nearest(const Vec3& q) const {
  Hit best;
  best.dist2 = std::numeric_limits<double>::max();
  if (root_ < 0) {
    best.index = -1;
    return best;
  }
  nearest_rec(root_, q, best);
  return best;
}

void KdTree3::nearest_rec(int node, const Vec3& q, Hit& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      int idx = order_[i];
      double d2 = distance2(points_[idx], q);
      if (d2 < best.dist2) {
        best.dist2 = d2;
        best.index = idx;
      }
    }
    return;
  }
  double delta = q[n.axis] - n.split;
  int near = delta <= 0 ? n.left : n.right;
  int far = delta <= 0 ? n.right : n.left;
  nearest_rec(near, q, best);
  if (delta * delta < best.dist2) nearest_rec(far, q, best);
}

void KdTree3::radius_search(const Vec3& q, double radius, std::vector<int>& out) const {
  out.clear();
  if (root_ < 0) return;
  radius_rec(root_, q, radius * radius, out);
}

void KdTree3::radius_rec(int node, const Vec3& q, double r2, std::vector<int>& out) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      int idx = order_[i];
      if (distance2(points_[idx], q) <= r2) out.push_back(idx);
    }
    return;
  }
  double delta = q[n.axis] - n.split;
  int near = delta <= 0 ? n.left : n.right;
  int far = delta <= 0 ? n.right : n.left;
  radius_rec(near, q, r2, out);
  if (delta * delta <= r2) radius_rec(far, q, r2, out);
}

}  // namespace cadrec
