#pragma once

// Small fixed-size vector/matrix types used throughout the library.

#include <array>
#include <cmath>
#include <limits>

namespace cadrec {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  // z component of the 2D cross product
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance2(const Vec3& a, const Vec3& b) { return (a - b).norm2(); }
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Column-major semantics: m[r][c], transform is column-vector convention.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 identity() {
    Mat3 r;
    r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
    return r;
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
        r.m[i][j] = s;
      }
    return r;
  }

  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  Vec3 col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }

  static Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    r.m[0][0] = c0.x; r.m[1][0] = c0.y; r.m[2][0] = c0.z;
    r.m[0][1] = c1.x; r.m[1][1] = c1.y; r.m[2][1] = c1.z;
    r.m[0][2] = c2.x; r.m[1][2] = c2.y; r.m[2][2] = c2.z;
    return r;
  }
};

// Rotation about x, then y, then z: R = Rz(rho) * Ry(phi) * Rx(theta).
inline Mat3 rotation_xyz(double theta, double phi, double rho) {
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  const double cr = std::cos(rho), sr = std::sin(rho);
  Mat3 r;
  r.m[0][0] = cr * cp;
  r.m[0][1] = -sr * ct + cr * sp * st;
  r.m[0][2] = sr * st + cr * sp * ct;
  r.m[1][0] = sr * cp;
  r.m[1][1] = cr * ct + sr * sp * st;
  r.m[1][2] = -cr * st + sr * sp * ct;
  r.m[2][0] = -sp;
  r.m[2][1] = cp * st;
  r.m[2][2] = cp * ct;
  return r;
}

// Maps angles into [-pi, pi).
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  a -= kPi;
  if (a >= kPi) a -= 2.0 * kPi;
  return a;
}

// Recovers (theta, phi, rho) such that rotation_xyz(theta, phi, rho) == r,
// angles in [-pi, pi). Assumes r is a proper rotation.
inline void euler_from_rotation(const Mat3& r, double& theta, double& phi, double& rho) {
  double sp = -r.m[2][0];
  sp = std::fmax(-1.0, std::fmin(1.0, sp));
  phi = std::asin(sp);
  if (std::abs(sp) < 1.0 - 1e-9) {
    theta = std::atan2(r.m[2][1], r.m[2][2]);
    rho = std::atan2(r.m[1][0], r.m[0][0]);
  } else {
    // gimbal lock: fold theta into rho
    theta = 0.0;
    rho = std::atan2(-r.m[0][1], r.m[1][1]);
  }
  theta = wrap_angle(theta);
  phi = wrap_angle(phi);
  rho = wrap_angle(rho);
}

struct Aabb2 {
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};

  void expand(const Vec2& p) {
    lo.x = std::fmin(lo.x, p.x); lo.y = std::fmin(lo.y, p.y);
    hi.x = std::fmax(hi.x, p.x); hi.y = std::fmax(hi.y, p.y);
  }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  bool empty() const { return lo.x > hi.x; }
  Vec2 extent() const { return hi - lo; }
};

struct Aabb3 {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void expand(const Vec3& p) {
    lo.x = std::fmin(lo.x, p.x); lo.y = std::fmin(lo.y, p.y); lo.z = std::fmin(lo.z, p.z);
    hi.x = std::fmax(hi.x, p.x); hi.y = std::fmax(hi.y, p.y); hi.z = std::fmax(hi.z, p.z);
  }
  void expand(const Aabb3& b) { expand(b.lo); expand(b.hi); }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
           p.z <= hi.z;
  }
  bool empty() const { return lo.x > hi.x; }
  Vec3 extent() const { return hi - lo; }
  double volume() const {
    if (empty()) return 0.0;
    Vec3 e = extent();
    return e.x * e.y * e.z;
  }
  double max_extent() const {
    Vec3 e = extent();
    return std::fmax(e.x, std::fmax(e.y, e.z));
  }
};

}  // namespace cadrec
