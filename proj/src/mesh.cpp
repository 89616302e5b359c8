#include "cdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

namespace cdg {

namespace {

/// Flip faces whose winding does not point outward (surface normal test at
/// the centroid). Deterministic; makes generation robust to table ordering.
void orient_outward(TriangleMesh& mesh) {
  for (auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 n_h = (b - a).cross(c - a);
    const Vec3 centroid = (a + b + c) / 3.0;
    if (n_h.dot(surface_jet(mesh.surface, centroid).n) < 0.0) std::swap(f[1], f[2]);
  }
}

TriangleMesh icosahedron(const ImplicitSurface& surface) {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;  // golden ratio
  std::vector<Vec3> raw = {
      {-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0},
      {0, -1, g}, {0, 1, g}, {0, -1, -g}, {0, 1, -g},
      {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1},
  };
  TriangleMesh mesh{surface, {}, {}};
  const double rho = surface.radius();
  mesh.vertices.reserve(raw.size());
  for (const Vec3& v : raw) mesh.vertices.push_back(rho * v.normalized());
  mesh.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  orient_outward(mesh);
  return mesh;
}

/// One 1:4 refinement step: split each edge at its midpoint and project the
/// new vertex back to the sphere. Children preserve the parent winding.
void subdivide_sphere(TriangleMesh& mesh) {
  const double rho = mesh.surface.radius();
  std::map<std::pair<int, int>, int> midpoint_of;  // ordered: deterministic indices
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    if (auto it = midpoint_of.find(key); it != midpoint_of.end()) return it->second;
    const Vec3 m = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    mesh.vertices.push_back(rho * m.normalized());
    const int idx = static_cast<int>(mesh.vertices.size()) - 1;
    midpoint_of.emplace(key, idx);
    return idx;
  };
  std::vector<std::array<int, 3>> refined;
  refined.reserve(4 * mesh.faces.size());
  for (const auto& f : mesh.faces) {
    const int m01 = midpoint(f[0], f[1]);
    const int m12 = midpoint(f[1], f[2]);
    const int m20 = midpoint(f[2], f[0]);
    refined.push_back({f[0], m01, m20});
    refined.push_back({f[1], m12, m01});
    refined.push_back({f[2], m20, m12});
    refined.push_back({m01, m12, m20});
  }
  mesh.faces = std::move(refined);
}

TriangleMesh torus_grid(const ImplicitSurface& surface, int resolution) {
  const double R = surface.major_radius(), r = surface.minor_radius();
  const int n_theta = 3 << resolution;  // around the tube
  const int n_phi = 5 << resolution;    // around the axis
  const double pi = std::numbers::pi;
  TriangleMesh mesh{surface, {}, {}};
  mesh.vertices.reserve(static_cast<size_t>(n_theta) * n_phi);
  for (int j = 0; j < n_phi; ++j) {
    const double phi = 2.0 * pi * j / n_phi;
    for (int i = 0; i < n_theta; ++i) {
      const double theta = 2.0 * pi * i / n_theta;
      const double w = R + r * std::cos(theta);
      mesh.vertices.emplace_back(w * std::cos(phi), w * std::sin(phi), r * std::sin(theta));
    }
  }
  auto vid = [&](int i, int j) { return (j % n_phi) * n_theta + (i % n_theta); };
  mesh.faces.reserve(static_cast<size_t>(2) * n_theta * n_phi);
  for (int j = 0; j < n_phi; ++j) {
    for (int i = 0; i < n_theta; ++i) {
      // Quad (i,j)-(i+1,j)-(i+1,j+1)-(i,j+1), split along the same diagonal
      // everywhere (both diagonals have equal length on this grid).
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  orient_outward(mesh);
  return mesh;
}

double face_area(const TriangleMesh& mesh, const std::array<int, 3>& f) {
  const Vec3 e1 = mesh.vertices[f[1]] - mesh.vertices[f[0]];
  const Vec3 e2 = mesh.vertices[f[2]] - mesh.vertices[f[0]];
  return 0.5 * e1.cross(e2).norm();
}

}  // namespace

TriangleMesh generate_mesh(const ImplicitSurface& surface, int resolution) {
  if (resolution < 0) throw std::invalid_argument("mesh resolution must be >= 0");
  if (surface.is_sphere()) {
    TriangleMesh mesh = icosahedron(surface);
    for (int k = 0; k < resolution; ++k) subdivide_sphere(mesh);
    return mesh;
  }
  return torus_grid(surface, resolution);
}

TriangleMesh perturb_vertices(const TriangleMesh& mesh, double amplitude,
                              std::uint64_t seed) {
  if (!(amplitude >= 0.0) || !(amplitude <= 0.3))
    throw std::invalid_argument("perturbation amplitude must be in [0, 0.3]");
  if (amplitude == 0.0) return mesh;

  const double h = mesh_size(mesh).h;
  // Local mesh size per vertex: the shortest incident edge. Scaling the
  // displacement locally keeps the full amplitude range valid on meshes whose
  // cells vary in size (the torus grid), where a global radius would swallow
  // the smallest cells whole.
  std::vector<double> local_h(mesh.vertices.size(),
                              std::numeric_limits<double>::infinity());
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
      local_h[a] = std::min(local_h[a], len);
      local_h[b] = std::min(local_h[b], len);
    }
  }
  TriangleMesh out = mesh;
  std::mt19937_64 rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < out.vertices.size(); ++i) {
    Vec3& v = out.vertices[i];
    const Vec3 n = surface_jet(mesh.surface, v).n;
    // Deterministic tangent basis: cross the normal with its least-aligned axis.
    int axis = 0;
    for (int k = 1; k < 3; ++k)
      if (std::abs(n[k]) < std::abs(n[axis])) axis = k;
    const Vec3 t1 = n.cross(Vec3::Unit(axis)).normalized();
    const Vec3 t2 = n.cross(t1);
    // Uniform draw from the tangent disc of radius amplitude * local_h.
    const double radius = amplitude * local_h[i] * std::sqrt(uniform01(rng));
    const double angle = two_pi * uniform01(rng);
    const Vec3 moved = v + radius * (std::cos(angle) * t1 + std::sin(angle) * t2);
    v = closest_point(mesh.surface, moved);
  }
  const double min_area = 1e-3 * h * h / 2.0;
  for (const auto& f : out.faces)
    if (face_area(out, f) < min_area)
      throw DegenerateFace("vertex perturbation produced a near-degenerate face");
  return out;
}

Adjacency build_adjacency(const TriangleMesh& mesh) {
  const int nfaces = static_cast<int>(mesh.faces.size());

  Adjacency adj;
  adj.face_geometry.resize(nfaces);
  adj.face_edges.assign(nfaces, {-1, -1, -1});
  for (int f = 0; f < nfaces; ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 cross = (b - a).cross(c - a);
    adj.face_geometry[f] = {cross.normalized(), 0.5 * cross.norm(), (a + b + c) / 3.0};
  }

  // Deterministic edge numbering: lexicographic over sorted endpoint pairs.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> incident;  // edge -> (face, local slot)
  for (int f = 0; f < nfaces; ++f) {
    const auto& tri = mesh.faces[f];
    for (int k = 0; k < 3; ++k) {
      // Edge k is opposite vertex k, i.e. it joins the other two vertices.
      const int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      incident[std::minmax(a, b)].push_back({f, k});
    }
  }

  adj.edges.reserve(incident.size());
  for (const auto& [key, faces] : incident) {
    if (faces.size() != 2)
      throw NonManifoldEdge("edge is not shared by exactly two faces");
    EdgeAdjacency edge;
    edge.v0 = key.first;
    edge.v1 = key.second;
    auto [fa, fb] = std::pair(faces[0], faces[1]);
    if (fa.first > fb.first) std::swap(fa, fb);  // "plus" face has the smaller index
    edge.face_plus = fa.first;
    edge.local_plus = fa.second;
    edge.face_minus = fb.first;
    edge.local_minus = fb.second;
    const Vec3& p0 = mesh.vertices[edge.v0];
    const Vec3& p1 = mesh.vertices[edge.v1];
    edge.midpoint = 0.5 * (p0 + p1);
    edge.length = (p1 - p0).norm();

    // In-plane outward conormal: (winding edge direction) x (facet normal).
    auto conormal = [&](int face, int slot) {
      const auto& tri = mesh.faces[face];
      const Vec3& va = mesh.vertices[tri[(slot + 1) % 3]];
      const Vec3& vb = mesh.vertices[tri[(slot + 2) % 3]];
      return (vb - va).cross(adj.face_geometry[face].normal).normalized();
    };
    edge.conormal_plus = conormal(edge.face_plus, edge.local_plus);
    edge.conormal_minus = conormal(edge.face_minus, edge.local_minus);
    edge.edge_normal = (edge.conormal_plus - edge.conormal_minus) /
                       (1.0 - edge.conormal_plus.dot(edge.conormal_minus));

    const int e = static_cast<int>(adj.edges.size());
    adj.face_edges[edge.face_plus][edge.local_plus] = e;
    adj.face_edges[edge.face_minus][edge.local_minus] = e;
    adj.edges.push_back(edge);
  }
  return adj;
}

MeshStats mesh_size(const TriangleMesh& mesh) {
  std::map<std::pair<int, int>, char> seen;
  double h = 0.0;
  for (const auto& tri : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      if (seen.emplace(std::minmax(a, b), 1).second)
        h = std::max(h, (mesh.vertices[a] - mesh.vertices[b]).norm());
    }
  }
  MeshStats stats;
  stats.h = h;
  stats.nvertices = static_cast<int>(mesh.vertices.size());
  stats.nedges = static_cast<int>(seen.size());
  stats.nfaces = static_cast<int>(mesh.faces.size());
  stats.ndof = stats.nvertices + stats.nedges;
  return stats;
}

void write_off(const TriangleMesh& mesh, std::ostream& out) {
  const MeshStats stats = mesh_size(mesh);
  out << "OFF\n" << stats.nvertices << ' ' << stats.nfaces << ' ' << stats.nedges << '\n';
  char line[128];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << line;
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

}  // namespace cdg
