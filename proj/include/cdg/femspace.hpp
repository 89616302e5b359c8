#pragma once

#include "cdg/mesh.hpp"

namespace cdg {

/// Global numbering of the continuous piecewise-quadratic space: one dof per
/// vertex followed by one dof per edge midpoint. Adjacent faces share the
/// three dofs of their common edge, which is what makes the space C0.
struct DofMap {
  int ndof = 0;
  int nvertices = 0, nedges = 0;
  /// Per face: 3 vertex dofs, then the 3 edge dofs ordered opposite each vertex.
  std::vector<std::array<int, 6>> face_dofs;
};

DofMap build_dofmap(const TriangleMesh& mesh, const Adjacency& adjacency);

/// Orthonormal in-plane frame of one facet plus the mapping between reference
/// coordinates (xi1, xi2) and frame coordinates. t1 follows the longest edge
/// (conditioning on thin triangles); {t1, t2, n_h} is right-handed, and the
/// Jacobian determinant equals twice the facet area.
struct FacetFrame {
  Vec3 origin;       // vertex 0
  Vec3 t1, t2, n_h;
  Mat2 jacobian;     // d(frame coords)/d(xi)
  Mat2 jacobian_inv;
  double area = 0.0;
};

/// Build the frame from the three vertex positions.
/// Throws DegenerateTriangle when the area collapses (< 1e-14 * longest^2).
FacetFrame facet_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2);

/// Values and reference gradients of the six quadratic Lagrange basis
/// functions at a barycentric point (lambda0, lambda1, lambda2):
/// vertex functions lambda_i (2 lambda_i - 1), edge functions 4 lambda_i lambda_j,
/// ordered vertices 0..2 then midpoints opposite vertex 0, 1, 2.
struct P2Eval {
  std::array<double, 6> value;
  std::array<Vec2, 6> grad;  // d/d(xi1, xi2) with lambda0 = 1 - xi1 - xi2
};
P2Eval reference_p2(const Vec3& barycentric);

/// Per-facet differential operators of the quadratic basis: tangential
/// gradients (3-vectors, affine in the barycentric point, exactly orthogonal
/// to n_h) and the constant facet Laplacians.
struct FacetOperators {
  FacetFrame frame;
  Eigen::Matrix<double, 3, 2> push;  // [t1 t2] * J^{-T}: reference gradient -> 3-vector
  std::array<double, 6> laplacian;   // constant per basis function

  /// Tangential gradients of all six basis functions at a barycentric point.
  std::array<Vec3, 6> gradients(const Vec3& barycentric) const;
};
FacetOperators facet_operators(const FacetFrame& frame);

/// Symmetric triangle rule, exact to polynomial degree 6 (12 points, positive
/// weights, weights summing to the reference area 1/2).
struct TriangleRule {
  std::vector<Vec3> barycentric;
  std::vector<double> weights;
};
const TriangleRule& triangle_rule();

/// Gauss-Legendre rule with 4 points on [0, 1], exact to degree 7
/// (positive weights summing to 1).
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const EdgeRule& edge_rule();

}  // namespace cdg
