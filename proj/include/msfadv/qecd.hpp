#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <vector>

#include "msfadv/mesh.hpp"

namespace msfadv {

namespace detail {

// Symmetric 4x4 plane quadric, stored as the 10 unique coefficients of
// error(v) = v'Av + 2b'v + c.
struct Quadric {
  double a00 = 0, a01 = 0, a02 = 0, a11 = 0, a12 = 0, a22 = 0;
  double b0 = 0, b1 = 0, b2 = 0, c = 0;

  void add_plane(const Vec3d& n, double d, double weight) {
    a00 += weight * n.x * n.x;
    a01 += weight * n.x * n.y;
    a02 += weight * n.x * n.z;
    a11 += weight * n.y * n.y;
    a12 += weight * n.y * n.z;
    a22 += weight * n.z * n.z;
    b0 += weight * d * n.x;
    b1 += weight * d * n.y;
    b2 += weight * d * n.z;
    c += weight * d * d;
  }
  Quadric& operator+=(const Quadric& o) {
    a00 += o.a00; a01 += o.a01; a02 += o.a02; a11 += o.a11; a12 += o.a12; a22 += o.a22;
    b0 += o.b0; b1 += o.b1; b2 += o.b2; c += o.c;
    return *this;
  }
  double eval(const Vec3d& v) const {
    return v.x * (a00 * v.x + 2 * a01 * v.y + 2 * a02 * v.z) +
           v.y * (a11 * v.y + 2 * a12 * v.z) + v.z * a22 * v.z +
           2 * (b0 * v.x + b1 * v.y + b2 * v.z) + c;
  }
  // Minimizer of the quadric if A is well conditioned.
  bool optimal(Vec3d& out) const {
    double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                 a02 * (a01 * a12 - a11 * a02);
    if (std::fabs(det) < 1e-12) return false;
    double rx = -b0, ry = -b1, rz = -b2;
    out.x = (rx * (a11 * a22 - a12 * a12) - a01 * (ry * a22 - a12 * rz) + a02 * (ry * a12 - a11 * rz)) / det;
    out.y = (a00 * (ry * a22 - rz * a12) - rx * (a01 * a22 - a12 * a02) + a02 * (a01 * rz - ry * a02)) / det;
    out.z = (a00 * (a11 * rz - ry * a12) - a01 * (a01 * rz - ry * a02) + rx * (a01 * a12 - a11 * a02)) / det;
    return true;
  }
};

}  // namespace detail

// Quadric edge collapse down to at most `target_faces`. Collapses are
// ordered by minimal quadric error; candidates that would create a
// non-manifold edge, flip a face normal, or produce a degenerate face are
// skipped, so a watertight input stays watertight. Stops early (above the
// target) when no legal collapse remains.
inline TriMesh qecd_simplify(const TriMesh& input, int target_faces) {
  if (target_faces < 4) throw Error("qecd_simplify: target_faces must be >= 4");
  input.validate();
  if (static_cast<int>(input.faces.size()) <= target_faces) return input;

  std::vector<Vec3d> verts = input.vertices;
  std::vector<std::array<int, 3>> faces = input.faces;
  std::vector<char> vert_alive(verts.size(), 1), face_alive(faces.size(), 1);
  std::vector<std::vector<int>> vfaces(verts.size());
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int v : faces[f]) vfaces[static_cast<std::size_t>(v)].push_back(static_cast<int>(f));

  std::vector<detail::Quadric> quadric(verts.size());
  auto face_plane = [&](int f, Vec3d& n, double& d, double& area) {
    const auto& [a, b, c] = faces[static_cast<std::size_t>(f)];
    Vec3d cr = (verts[b] - verts[a]).cross(verts[c] - verts[a]);
    area = 0.5 * norm(cr);
    if (area < TriMesh::kMinFaceArea) { n = {0, 0, 0}; d = 0; return; }
    n = cr * (1.0 / (2.0 * area));
    d = -n.dot(verts[a]);
  };
  for (std::size_t f = 0; f < faces.size(); ++f) {
    Vec3d n; double d, area;
    face_plane(static_cast<int>(f), n, d, area);
    for (int v : faces[f]) quadric[static_cast<std::size_t>(v)].add_plane(n, d, area);
  }

  std::vector<int> version(verts.size(), 0);
  struct Cand {
    double cost;
    int a, b, va, vb;
    Vec3d pos;
    bool operator<(const Cand& o) const { return cost > o.cost; }  // min-heap
  };
  std::priority_queue<Cand> heap;

  auto neighbors_of = [&](int v) {
    std::set<int> out;
    for (int f : vfaces[static_cast<std::size_t>(v)]) {
      if (!face_alive[static_cast<std::size_t>(f)]) continue;
      for (int u : faces[static_cast<std::size_t>(f)])
        if (u != v) out.insert(u);
    }
    return out;
  };

  auto push_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    detail::Quadric q = quadric[static_cast<std::size_t>(a)];
    q += quadric[static_cast<std::size_t>(b)];
    Vec3d pos;
    if (!q.optimal(pos)) {
      Vec3d mid = (verts[a] + verts[b]) * 0.5;
      pos = mid;
      double best = q.eval(mid);
      if (q.eval(verts[a]) < best) { pos = verts[a]; best = q.eval(verts[a]); }
      if (q.eval(verts[b]) < best) pos = verts[b];
    }
    heap.push({q.eval(pos), a, b, version[static_cast<std::size_t>(a)],
               version[static_cast<std::size_t>(b)], pos});
  };

  {
    std::set<std::pair<int, int>> seen;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto& [a, b, c] = faces[f];
      for (auto [u, w] : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}}) {
        auto key = std::minmax(u, w);
        if (seen.insert({key.first, key.second}).second) push_edge(u, w);
      }
    }
  }

  int alive_faces = static_cast<int>(faces.size());

  auto collapse_legal = [&](const Cand& cand) {
    int a = cand.a, b = cand.b;
    // Link condition: common neighbors must be exactly the two vertices
    // opposite the shared faces, otherwise the collapse pinches the mesh.
    auto na = neighbors_of(a), nb = neighbors_of(b);
    std::vector<int> common;
    std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(common));
    int shared_faces = 0;
    for (int f : vfaces[static_cast<std::size_t>(a)]) {
      if (!face_alive[static_cast<std::size_t>(f)]) continue;
      const auto& fc = faces[static_cast<std::size_t>(f)];
      if (std::count(fc.begin(), fc.end(), b)) ++shared_faces;
    }
    if (shared_faces != 2 || common.size() != 2) return false;
    // Normal flip / degeneracy check over every surviving incident face.
    for (int v : {a, b}) {
      for (int f : vfaces[static_cast<std::size_t>(v)]) {
        if (!face_alive[static_cast<std::size_t>(f)]) continue;
        const auto& fc = faces[static_cast<std::size_t>(f)];
        if (std::count(fc.begin(), fc.end(), a) && std::count(fc.begin(), fc.end(), b))
          continue;  // dies in the collapse
        Vec3d p[3], q[3];
        for (int i = 0; i < 3; ++i) {
          p[i] = verts[static_cast<std::size_t>(fc[static_cast<std::size_t>(i)])];
          q[i] = (fc[static_cast<std::size_t>(i)] == a || fc[static_cast<std::size_t>(i)] == b)
                     ? cand.pos
                     : p[i];
        }
        Vec3d n_old = (p[1] - p[0]).cross(p[2] - p[0]);
        Vec3d n_new = (q[1] - q[0]).cross(q[2] - q[0]);
        if (0.5 * norm(n_new) < TriMesh::kMinFaceArea) return false;
        if (n_old.dot(n_new) <= 0.0) return false;
      }
    }
    return true;
  };

  while (alive_faces > target_faces && !heap.empty()) {
    Cand cand = heap.top();
    heap.pop();
    int a = cand.a, b = cand.b;
    if (!vert_alive[static_cast<std::size_t>(a)] || !vert_alive[static_cast<std::size_t>(b)]) continue;
    if (cand.va != version[static_cast<std::size_t>(a)] ||
        cand.vb != version[static_cast<std::size_t>(b)])
      continue;  // stale entry
    if (!collapse_legal(cand)) continue;

    // Collapse b into a at the optimal position.
    verts[static_cast<std::size_t>(a)] = cand.pos;
    quadric[static_cast<std::size_t>(a)] += quadric[static_cast<std::size_t>(b)];
    vert_alive[static_cast<std::size_t>(b)] = 0;
    for (int f : vfaces[static_cast<std::size_t>(b)]) {
      if (!face_alive[static_cast<std::size_t>(f)]) continue;
      auto& fc = faces[static_cast<std::size_t>(f)];
      if (std::count(fc.begin(), fc.end(), a)) {
        face_alive[static_cast<std::size_t>(f)] = 0;
        --alive_faces;
      } else {
        for (int& v : fc)
          if (v == b) v = a;
        vfaces[static_cast<std::size_t>(a)].push_back(f);
      }
    }
    vfaces[static_cast<std::size_t>(b)].clear();
    ++version[static_cast<std::size_t>(a)];
    ++version[static_cast<std::size_t>(b)];
    for (int u : neighbors_of(a)) push_edge(a, u);
  }

  TriMesh out;
  std::vector<int> remap(verts.size(), -1);
  for (std::size_t v = 0; v < verts.size(); ++v) {
    if (vert_alive[v]) {
      remap[v] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(verts[v]);
    }
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (!face_alive[f]) continue;
    out.faces.push_back({remap[static_cast<std::size_t>(faces[f][0])],
                         remap[static_cast<std::size_t>(faces[f][1])],
                         remap[static_cast<std::size_t>(faces[f][2])]});
  }
  return out;
}

}  // namespace msfadv
