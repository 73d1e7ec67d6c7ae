#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "nlh/grid.hpp"

namespace nlh {

using Vec3 = std::array<double, 3>;

// Quadrature mesh on S^2: icosahedral refinement, one node per vertex,
// vertex weight = one third of the spherical area of its incident faces.
// The mesh is antipodally symmetric (the icosahedron is, and midpoint
// subdivision preserves the symmetry).
struct SphereMesh {
  int order = 0;
  std::vector<Vec3> directions;
  std::vector<double> weights;
  std::vector<std::array<int, 3>> faces;
  std::vector<int> antipode;                 // index of -xi for each direction
  std::vector<std::vector<int>> incident;    // faces touching each vertex
};

namespace detail {

inline Vec3 normalized(const Vec3& v) {
  double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  return {v[0] / n, v[1] / n, v[2] / n};
}

inline double dot3(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// solid angle of the spherical triangle (a, b, c) via Van Oosterom-Strackee
inline double spherical_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  double num = std::abs(dot3(a, cross3(b, c)));
  double den = 1.0 + dot3(a, b) + dot3(b, c) + dot3(c, a);
  return 2.0 * std::atan2(num, den);
}

}  // namespace detail

inline SphereMesh sphere_mesh(int order) {
  if (order < 0) throw InvalidScenario("sphere mesh order must be >= 0");
  using detail::normalized;
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t},  {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& p : v) p = normalized(p);
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
      {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
      {3, 2, 6},  {3, 6, 8},  {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
      {8, 6, 7},  {9, 8, 1}};
  for (int lev = 0; lev < order; ++lev) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int i, int j) {
      auto key = std::minmax(i, j);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 m = normalized({v[i][0] + v[j][0], v[i][1] + v[j][1], v[i][2] + v[j][2]});
      v.push_back(m);
      int id = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> nf;
    nf.reserve(4 * f.size());
    for (const auto& [a, b, c] : f) {
      int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      nf.push_back({a, ab, ca});
      nf.push_back({b, bc, ab});
      nf.push_back({c, ca, bc});
      nf.push_back({ab, bc, ca});
    }
    f = std::move(nf);
  }

  SphereMesh mesh;
  mesh.order = order;
  mesh.directions = v;
  mesh.faces = f;
  mesh.weights.assign(v.size(), 0.0);
  for (const auto& [a, b, c] : f) {
    double w = detail::spherical_area(v[a], v[b], v[c]) / 3.0;
    mesh.weights[a] += w;
    mesh.weights[b] += w;
    mesh.weights[c] += w;
  }
  mesh.incident.assign(v.size(), {});
  for (std::size_t k = 0; k < f.size(); ++k)
    for (int vid : f[k]) mesh.incident[vid].push_back(static_cast<int>(k));
  mesh.antipode.assign(v.size(), -1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = -2.0;
    int arg = -1;
    for (std::size_t j = 0; j < v.size(); ++j) {
      double d = -detail::dot3(v[i], v[j]);
      if (d > best) {
        best = d;
        arg = static_cast<int>(j);
      }
    }
    if (best < 1.0 - 1e-10) throw InvalidScenario("sphere mesh lost antipodal symmetry");
    mesh.antipode[i] = arg;
  }
  return mesh;
}

// Evaluate per-direction values at an arbitrary unit vector: nearest neighbor
// below order 3, planar-barycentric on the containing face at order >= 3.
inline Complex sphere_interpolate(const SphereMesh& mesh, const std::vector<Complex>& vals,
                                  const Vec3& xhat) {
  if (vals.size() != mesh.directions.size())
    throw GridMismatch("sphere value count does not match the mesh");
  double best = -2.0;
  std::size_t arg = 0;
  for (std::size_t j = 0; j < mesh.directions.size(); ++j) {
    double d = detail::dot3(mesh.directions[j], xhat);
    if (d > best) {
      best = d;
      arg = j;
    }
  }
  if (mesh.order < 3) return vals[arg];
  // barycentric on a face incident to the nearest vertex; on a convex
  // triangulation the containing face always touches the nearest vertex
  auto try_face = [&](int k, Complex& out) {
    const auto& [a, b, c] = mesh.faces[k];
    const Vec3 &A = mesh.directions[a], &B = mesh.directions[b], &C = mesh.directions[c];
    double det = detail::dot3(detail::cross3(B, C), A);
    if (std::abs(det) < 1e-14) return false;
    double alpha = detail::dot3(detail::cross3(B, C), xhat) / det;
    double beta = detail::dot3(detail::cross3(C, A), xhat) / det;
    double gamma = detail::dot3(detail::cross3(A, B), xhat) / det;
    if (alpha < -1e-9 || beta < -1e-9 || gamma < -1e-9) return false;
    double s = alpha + beta + gamma;
    out = (alpha * vals[a] + beta * vals[b] + gamma * vals[c]) / s;
    return true;
  };
  Complex out;
  for (int k : mesh.incident[arg])
    if (try_face(k, out)) return out;
  for (std::size_t k = 0; k < mesh.faces.size(); ++k)
    if (try_face(static_cast<int>(k), out)) return out;
  return vals[arg];
}

}  // namespace nlh
