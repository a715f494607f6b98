#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msfadv/common.hpp"

namespace msfadv {

// Vertex-face mesh in the LiDAR frame (x forward, y left, z up, meters).
// Faces are CCW-outward vertex index triples. Attack perturbation moves
// vertices only; the face list is immutable.
struct TriMesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<int, 3>> faces;

  static constexpr double kMinFaceArea = 1e-12;  // m^2

  void validate() const {
    const int nv = static_cast<int>(vertices.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto& [a, b, c] = faces[f];
      if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
        throw Error("mesh: face " + std::to_string(f) + " references vertex out of range");
      if (a == b || b == c || a == c)
        throw Error("mesh: face " + std::to_string(f) + " has repeated vertex indices");
      Vec3d e1 = vertices[b] - vertices[a];
      Vec3d e2 = vertices[c] - vertices[a];
      if (0.5 * norm(e1.cross(e2)) <= kMinFaceArea)
        throw Error("mesh: face " + std::to_string(f) + " is degenerate (area <= 1e-12)");
    }
  }

  Vec3d centroid() const {
    Vec3d s{0, 0, 0};
    for (const auto& v : vertices) s += v;
    double n = vertices.empty() ? 1.0 : static_cast<double>(vertices.size());
    return s * (1.0 / n);
  }
};

// Yaw about the vertical axis through `anchor`, then a ground-plane shift.
struct RigidPose {
  double yaw = 0.0;          // radians, (-pi, pi]
  double shift_x = 0.0;      // meters
  double shift_y = 0.0;      // meters
  Vec3d anchor{0, 0, 0};

  RigidPose inverse() const {
    // Undo shift first, then rotate back about the same anchor.
    RigidPose inv;
    inv.yaw = -yaw;
    double c = std::cos(-yaw), s = std::sin(-yaw);
    inv.shift_x = -(shift_x * c - shift_y * s);
    inv.shift_y = -(shift_x * s + shift_y * c);
    inv.anchor = {anchor.x + shift_x, anchor.y + shift_y, anchor.z};
    return inv;
  }
};

// Poses a vertex list. Templated so posed vertices can be tape values;
// the pose itself is never differentiated. The adjoint of the rotation is
// its transpose, which the product form below yields automatically.
template <class T>
std::vector<Vec3<T>> apply_pose_vertices(const std::vector<Vec3<T>>& verts, const RigidPose& pose) {
  const double c = std::cos(pose.yaw), s = std::sin(pose.yaw);
  std::vector<Vec3<T>> out;
  out.reserve(verts.size());
  for (const auto& v : verts) {
    T dx = v.x - pose.anchor.x;
    T dy = v.y - pose.anchor.y;
    out.push_back({dx * c - dy * s + (pose.anchor.x + pose.shift_x),
                   dx * s + dy * c + (pose.anchor.y + pose.shift_y),
                   v.z});
  }
  return out;
}

inline TriMesh apply_pose(const TriMesh& mesh, const RigidPose& pose) {
  TriMesh out;
  out.vertices = apply_pose_vertices(mesh.vertices, pose);
  out.faces = mesh.faces;
  return out;
}

// Adjacency from face edges only. Symmetric by construction; vertices
// referenced by no face get an empty entry.
inline std::vector<std::vector<int>> vertex_neighbors(const TriMesh& mesh) {
  std::vector<std::vector<int>> nbr(mesh.vertices.size());
  auto link = [&](int a, int b) {
    nbr[static_cast<std::size_t>(a)].push_back(b);
    nbr[static_cast<std::size_t>(b)].push_back(a);
  };
  for (const auto& [a, b, c] : mesh.faces) {
    link(a, b);
    link(b, c);
    link(c, a);
  }
  for (auto& list : nbr) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbr;
}

// ASCII OBJ, `v x y z` and `f i j k` records, 1-based indices. Polygons
// with more than 3 vertices are fan-triangulated. Anything else (vt, vn,
// comments, groups) is ignored.
inline TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_obj: cannot open '" + path + "'");
  TriMesh mesh;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3d v;
      if (!(ss >> v.x >> v.y >> v.z))
        throw Error("load_obj: " + path + ":" + std::to_string(lineno) + ": malformed vertex");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        // accept "i", "i/...", "i//..."
        std::size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int i = 0;
        try {
          i = std::stoi(head);
        } catch (const std::exception&) {
          throw Error("load_obj: " + path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
        }
        if (i < 1 || i > static_cast<int>(mesh.vertices.size()))
          throw Error("load_obj: " + path + ":" + std::to_string(lineno) +
                      ": vertex index " + std::to_string(i) + " out of range (have " +
                      std::to_string(mesh.vertices.size()) + " vertices)");
        idx.push_back(i - 1);
      }
      if (idx.size() < 3)
        throw Error("load_obj: " + path + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  mesh.validate();
  return mesh;
}

inline void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("save_obj: cannot open '" + path + "' for writing");
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f\n", v.x, v.y, v.z);
    out << buf;
  }
  for (const auto& [a, b, c] : mesh.faces)
    out << "f " << a + 1 << ' ' << b + 1 << ' ' << c + 1 << '\n';
  if (!out) throw Error("save_obj: write failed for '" + path + "'");
}

}  // namespace msfadv
