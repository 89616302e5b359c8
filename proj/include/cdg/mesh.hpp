#pragma once

#include "cdg/geometry.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cdg {

/// Closed triangulated approximation of an implicit surface: every vertex
/// lies on the surface (|d(v)| <= 1e-10) and faces wind counter-clockwise
/// seen from outside (facet normal . surface normal > 0 at the centroid).
struct TriangleMesh {
  ImplicitSurface surface;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

/// One interior edge with its two incident faces and in-plane outward
/// conormals. "plus" is the incident face with the smaller face index.
struct EdgeAdjacency {
  int v0 = -1, v1 = -1;          // endpoint vertex indices, v0 < v1
  int face_plus = -1, face_minus = -1;
  int local_plus = -1, local_minus = -1;  // local edge slot; edge k is opposite vertex k
  Vec3 midpoint = Vec3::Zero();
  double length = 0.0;
  Vec3 conormal_plus = Vec3::Zero();   // unit, in facet plane, pointing out of face_plus
  Vec3 conormal_minus = Vec3::Zero();  // idem for face_minus
  Vec3 edge_normal = Vec3::Zero();     // (nu+ - nu-) / (1 - nu+ . nu-), not unit in general
};

struct FaceGeometry {
  Vec3 normal = Vec3::Zero();  // unit facet normal (outward)
  double area = 0.0;
  Vec3 centroid = Vec3::Zero();
};

/// Edge table plus per-face geometry and face -> edge incidence
/// (face_edges[f][k] is the edge opposite local vertex k of face f).
struct Adjacency {
  std::vector<EdgeAdjacency> edges;
  std::vector<FaceGeometry> face_geometry;
  std::vector<std::array<int, 3>> face_edges;
};

struct MeshStats {
  double h = 0.0;  // max edge length
  int ndof = 0;    // vertices + edges (continuous quadratic space)
  int nvertices = 0, nedges = 0, nfaces = 0;
};

/// Structured mesh family. Sphere: icosahedron subdivided `resolution` times,
/// new vertices projected radially. Torus: (n_theta x n_phi) grid with
/// n_theta = 3*2^resolution around the tube and n_phi = 5*2^resolution around
/// the axis (balancing the two perimeters at R=1, r=0.6), each quad split
/// along a fixed diagonal; the two diagonals of a structured torus quad have
/// equal length, so the consistent choice is also a shortest-diagonal split.
TriangleMesh generate_mesh(const ImplicitSurface& surface, int resolution);

/// Displace every vertex by a uniformly random tangential vector of length
/// <= amplitude times the local mesh size (shortest incident edge), then
/// reproject onto the surface. Deterministic for a fixed seed (mt19937_64
/// with 53-bit uniform extraction); connectivity is unchanged. Throws
/// DegenerateFace if a face area drops below 1e-3 * h^2/2.
TriangleMesh perturb_vertices(const TriangleMesh& mesh, double amplitude,
                              std::uint64_t seed);

/// Build the edge table, conormals, and the edge normal for a closed mesh.
/// Throws NonManifoldEdge when an edge is not shared by exactly two faces.
Adjacency build_adjacency(const TriangleMesh& mesh);

MeshStats mesh_size(const TriangleMesh& mesh);

/// ASCII OFF export ("OFF\nV F E\n" + vertex lines + face lines).
void write_off(const TriangleMesh& mesh, std::ostream& out);

}  // namespace cdg
