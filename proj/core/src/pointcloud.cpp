#include "cadrec/pointcloud.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cadrec/dsl_io.hpp"
#include "cadrec/errors.hpp"

namespace cadrec {

namespace {

void append_number(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  s += buf;
}

}  // namespace

void save_ply(const std::string& path, const PointCloud& cloud,
              const std::vector<std::string>& comments) {
  std::string out;
  out.reserve(cloud.size() * 48 + 256);
  out += "ply\nformat ascii 1.0\n";
  for (const std::string& c : comments) out += "comment " + c + "\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  bool normals = cloud.has_normals();
  if (normals) out += "property double nx\nproperty double ny\nproperty double nz\n";
  out += "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    append_number(out, p.x); out += ' ';
    append_number(out, p.y); out += ' ';
    append_number(out, p.z);
    if (normals) {
      const Vec3& n = cloud.normals[i];
      out += ' '; append_number(out, n.x);
      out += ' '; append_number(out, n.y);
      out += ' '; append_number(out, n.z);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply")
    throw InputError("'" + path + "' is not a PLY file");

  std::size_t count = 0;
  std::vector<std::string> props;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string kind;
      ls >> kind >> count;
      if (kind != "vertex") throw InputError("PLY element '" + kind + "' not supported");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw InputError("only ascii PLY is supported");

  int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i] == "x") ix = static_cast<int>(i);
    if (props[i] == "y") iy = static_cast<int>(i);
    if (props[i] == "z") iz = static_cast<int>(i);
    if (props[i] == "nx") inx = static_cast<int>(i);
    if (props[i] == "ny") iny = static_cast<int>(i);
    if (props[i] == "nz") inz = static_cast<int>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) throw InputError("PLY is missing x/y/z properties");
  bool normals = inx >= 0 && iny >= 0 && inz >= 0;

  PointCloud cloud;
  cloud.positions.reserve(count);
  if (normals) cloud.normals.reserve(count);
  std::vector<double> values(props.size());
  for (std::size_t row = 0; row < count; ++row) {
    for (std::size_t i = 0; i < props.size(); ++i)
      if (!(in >> values[i]))
        throw InputError("truncated PLY body in '" + path + "' at vertex " + std::to_string(row));
    cloud.positions.push_back({values[ix], values[iy], values[iz]});
    if (normals) cloud.normals.push_back({values[inx], values[iny], values[inz]});
  }
  return cloud;
}

void save_xyz(const std::string& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 48);
  bool normals = cloud.has_normals();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    append_number(out, p.x); out += ' ';
    append_number(out, p.y); out += ' ';
    append_number(out, p.z);
    if (normals) {
      const Vec3& n = cloud.normals[i];
      out += ' '; append_number(out, n.x);
      out += ' '; append_number(out, n.y);
      out += ' '; append_number(out, n.z);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

PointCloud load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) throw InputError("bad XYZ line in '" + path + "'");
    cloud.positions.push_back({x, y, z});
    double nx, ny, nz;
    if (ls >> nx >> ny >> nz) cloud.normals.push_back({nx, ny, nz});
  }
  if (!cloud.normals.empty() && cloud.normals.size() != cloud.positions.size())
    throw InputError("XYZ file mixes rows with and without normals");
  return cloud;
}

PointCloud load_cloud(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".ply") return load_ply(path);
  if (ext == ".xyz") return load_xyz(path);
  throw InputError("unsupported point cloud extension '" + ext + "' (use .ply or .xyz)");
}

}  // namespace cadrec
