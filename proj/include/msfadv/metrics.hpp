#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "msfadv/mesh.hpp"

namespace msfadv {

// True iff every undirected edge is shared by exactly two faces with
// opposite directed orientation. Purely topological: vertex motion that
// keeps faces non-degenerate cannot change the result.
inline bool watertightness(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> directed;
  for (const auto& [a, b, c] : mesh.faces) {
    if (++directed[{a, b}] > 1) return false;
    if (++directed[{b, c}] > 1) return false;
    if (++directed[{c, a}] > 1) return false;
  }
  for (const auto& [edge, count] : directed) {
    auto rev = directed.find({edge.second, edge.first});
    if (rev == directed.end() || rev->second != 1) return false;
  }
  return !mesh.faces.empty();
}

namespace detail {

// Devillers-Guigue style triangle-triangle test on doubles. Returns true
// for a proper crossing (shared interior), false for disjoint or
// touch-only contact within tolerance.
inline int orient3d(const Vec3d& a, const Vec3d& b, const Vec3d& c, const Vec3d& d, double eps) {
  double det = (b - a).cross(c - a).dot(d - a);
  if (det > eps) return 1;
  if (det < -eps) return -1;
  return 0;
}

inline bool segment_crosses_triangle(const Vec3d& p, const Vec3d& q,
                                     const Vec3d& a, const Vec3d& b, const Vec3d& c,
                                     double eps) {
  int sp = orient3d(a, b, c, p, eps);
  int sq = orient3d(a, b, c, q, eps);
  if (sp == sq || sp == 0 || sq == 0) return false;  // no strict plane crossing
  int s1 = orient3d(p, q, a, b, eps);
  int s2 = orient3d(p, q, b, c, eps);
  int s3 = orient3d(p, q, c, a, eps);
  if (s1 == 0 || s2 == 0 || s3 == 0) return false;   // grazing contact
  return s1 == s2 && s2 == s3;
}

inline bool coplanar_overlap(const Vec3d& a0, const Vec3d& a1, const Vec3d& a2,
                             const Vec3d& b0, const Vec3d& b1, const Vec3d& b2,
                             double eps) {
  // Project to the dominant axis plane and use 2D separating-axis edges.
  Vec3d n = (a1 - a0).cross(a2 - a0);
  int drop = 0;
  double ax = std::fabs(n.x), ay = std::fabs(n.y), az = std::fabs(n.z);
  if (ay > ax && ay >= az) drop = 1;
  else if (az > ax && az > ay) drop = 2;
  auto proj = [&](const Vec3d& v) -> std::pair<double, double> {
    if (drop == 0) return {v.y, v.z};
    if (drop == 1) return {v.x, v.z};
    return {v.x, v.y};
  };
  std::pair<double, double> A[3] = {proj(a0), proj(a1), proj(a2)};
  std::pair<double, double> B[3] = {proj(b0), proj(b1), proj(b2)};
  auto cross2 = [](const std::pair<double, double>& o, const std::pair<double, double>& p,
                   const std::pair<double, double>& q) {
    return (p.first - o.first) * (q.second - o.second) -
           (p.second - o.second) * (q.first - o.first);
  };
  auto separated_by_edges_of = [&](const std::pair<double, double>* T,
                                   const std::pair<double, double>* U) {
    for (int i = 0; i < 3; ++i) {
      const auto& o = T[i];
      const auto& p = T[(i + 1) % 3];
      double self = cross2(o, p, T[(i + 2) % 3]);
      double sign = self >= 0 ? 1.0 : -1.0;
      bool all_out = true;
      for (int j = 0; j < 3; ++j)
        if (sign * cross2(o, p, U[j]) > -eps) { all_out = false; break; }
      if (all_out) return true;
    }
    return false;
  };
  return !separated_by_edges_of(A, B) && !separated_by_edges_of(B, A);
}

inline bool triangles_intersect(const Vec3d& a0, const Vec3d& a1, const Vec3d& a2,
                                const Vec3d& b0, const Vec3d& b1, const Vec3d& b2,
                                double eps = 1e-12) {
  int d0 = orient3d(b0, b1, b2, a0, eps);
  int d1 = orient3d(b0, b1, b2, a1, eps);
  int d2 = orient3d(b0, b1, b2, a2, eps);
  if (d0 == 0 && d1 == 0 && d2 == 0)
    return coplanar_overlap(a0, a1, a2, b0, b1, b2, eps);
  return segment_crosses_triangle(a0, a1, b0, b1, b2, eps) ||
         segment_crosses_triangle(a1, a2, b0, b1, b2, eps) ||
         segment_crosses_triangle(a2, a0, b0, b1, b2, eps) ||
         segment_crosses_triangle(b0, b1, a0, a1, a2, eps) ||
         segment_crosses_triangle(b1, b2, a0, a1, a2, eps) ||
         segment_crosses_triangle(b2, b0, a0, a1, a2, eps);
}

}  // namespace detail

// Fraction of faces that properly intersect at least one non-adjacent
// face. Face pairs sharing any vertex are excluded: adjacent faces always
// touch, so the ratio is only meaningful over non-adjacent pairs.
inline double self_intersection_ratio(const TriMesh& mesh) {
  const std::size_t nf = mesh.faces.size();
  if (nf == 0) return 0.0;
  std::vector<char> hit(nf, 0);

  struct Box {
    Vec3d lo, hi;
  };
  std::vector<Box> boxes(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& [a, b, c] = mesh.faces[f];
    const Vec3d &A = mesh.vertices[a], &B = mesh.vertices[b], &C = mesh.vertices[c];
    boxes[f].lo = {std::min({A.x, B.x, C.x}), std::min({A.y, B.y, C.y}), std::min({A.z, B.z, C.z})};
    boxes[f].hi = {std::max({A.x, B.x, C.x}), std::max({A.y, B.y, C.y}), std::max({A.z, B.z, C.z})};
  }
  auto boxes_overlap = [](const Box& p, const Box& q) {
    return p.lo.x <= q.hi.x && q.lo.x <= p.hi.x &&
           p.lo.y <= q.hi.y && q.lo.y <= p.hi.y &&
           p.lo.z <= q.hi.z && q.lo.z <= p.hi.z;
  };

  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t g = f + 1; g < nf; ++g) {
      if (hit[f] && hit[g]) continue;
      const auto& ff = mesh.faces[f];
      const auto& gg = mesh.faces[g];
      bool shared = false;
      for (int i : ff)
        for (int j : gg)
          if (i == j) shared = true;
      if (shared) continue;
      if (!boxes_overlap(boxes[f], boxes[g])) continue;
      if (detail::triangles_intersect(mesh.vertices[ff[0]], mesh.vertices[ff[1]], mesh.vertices[ff[2]],
                                      mesh.vertices[gg[0]], mesh.vertices[gg[1]], mesh.vertices[gg[2]])) {
        hit[f] = hit[g] = 1;
      }
    }
  }
  std::size_t count = 0;
  for (char h : hit) count += h;
  return static_cast<double>(count) / static_cast<double>(nf);
}

struct CurvatureResult {
  std::vector<double> per_vertex;   // 1/m^2; entries for skipped vertices are 0
  std::vector<char> skipped;        // zero mixed area or boundary vertex
  double mean = 0.0;                // over non-skipped vertices
  double deficit_sum = 0.0;         // sum of raw angle deficits (Gauss-Bonnet check)
};

// Discrete Gaussian curvature by angle deficit over Meyer mixed area:
// K(v) = (2*pi - sum of incident face angles) / A_mixed(v).
// Boundary vertices (any edge not shared by two faces) are excluded.
inline CurvatureResult mean_gaussian_curvature(const TriMesh& mesh) {
  const std::size_t nv = mesh.vertices.size();
  std::vector<double> deficit(nv, 2.0 * kPi);
  std::vector<double> area(nv, 0.0);
  std::vector<char> touched(nv, 0);

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& [a, b, c] : mesh.faces) {
    auto add = [&](int i, int j) { edge_count[{std::min(i, j), std::max(i, j)}]++; };
    add(a, b); add(b, c); add(c, a);
  }
  std::vector<char> boundary(nv, 0);
  for (const auto& [edge, count] : edge_count)
    if (count != 2) boundary[edge.first] = boundary[edge.second] = 1;

  for (const auto& face : mesh.faces) {
    const Vec3d* p[3] = {&mesh.vertices[face[0]], &mesh.vertices[face[1]], &mesh.vertices[face[2]]};
    double angles[3];
    double lens2[3];  // edge opposite to corner i
    for (int i = 0; i < 3; ++i) {
      Vec3d u = *p[(i + 1) % 3] - *p[i];
      Vec3d w = *p[(i + 2) % 3] - *p[i];
      double ca = u.dot(w) / (norm(u) * norm(w));
      angles[i] = std::acos(std::clamp(ca, -1.0, 1.0));
      lens2[i] = (*p[(i + 2) % 3] - *p[(i + 1) % 3]).norm2();
    }
    Vec3d e1 = *p[1] - *p[0], e2 = *p[2] - *p[0];
    double face_area = 0.5 * norm(e1.cross(e2));
    bool obtuse = angles[0] > kPi / 2 || angles[1] > kPi / 2 || angles[2] > kPi / 2;
    for (int i = 0; i < 3; ++i) {
      int vi = face[i];
      deficit[vi] -= angles[i];
      touched[vi] = 1;
      if (!obtuse) {
        // Voronoi area: 1/8 * (|e_j|^2 cot(a_j) + |e_k|^2 cot(a_k)) for the
        // two edges incident to corner i.
        int j = (i + 1) % 3, k = (i + 2) % 3;
        double cot_j = std::cos(angles[j]) / std::sin(angles[j]);
        double cot_k = std::cos(angles[k]) / std::sin(angles[k]);
        area[vi] += (lens2[k] * cot_j + lens2[j] * cot_k) / 8.0;
      } else {
        area[vi] += angles[i] > kPi / 2 ? face_area / 2.0 : face_area / 4.0;
      }
    }
  }

  CurvatureResult res;
  res.per_vertex.assign(nv, 0.0);
  res.skipped.assign(nv, 0);
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t v = 0; v < nv; ++v) {
    if (!touched[v] || boundary[v] || area[v] <= 0.0) {
      res.skipped[v] = 1;
      continue;
    }
    res.per_vertex[v] = deficit[v] / area[v];
    res.deficit_sum += deficit[v];
    sum += res.per_vertex[v];
    ++used;
  }
  res.mean = used ? sum / static_cast<double>(used) : 0.0;
  return res;
}

}  // namespace msfadv
