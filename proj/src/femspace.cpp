#include "cdg/femspace.hpp"

#include <cmath>

namespace cdg {

DofMap build_dofmap(const TriangleMesh& mesh, const Adjacency& adjacency) {
  DofMap dofmap;
  dofmap.nvertices = static_cast<int>(mesh.vertices.size());
  dofmap.nedges = static_cast<int>(adjacency.edges.size());
  dofmap.ndof = dofmap.nvertices + dofmap.nedges;
  dofmap.face_dofs.resize(mesh.faces.size());
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const auto& edges = adjacency.face_edges[f];
    dofmap.face_dofs[f] = {tri[0], tri[1], tri[2],
                           dofmap.nvertices + edges[0],
                           dofmap.nvertices + edges[1],
                           dofmap.nvertices + edges[2]};
  }
  return dofmap;
}

FacetFrame facet_frame(const Vec3& v0, const Vec3& v1, const Vec3& v2) {
  const Vec3 e1 = v1 - v0, e2 = v2 - v0;
  const Vec3 cross = e1.cross(e2);
  const double area = 0.5 * cross.norm();

  // Longest edge first for conditioning on thin triangles.
  const std::array<Vec3, 3> edge_vec = {e1, v2 - v1, v0 - v2};
  int longest = 0;
  for (int k = 1; k < 3; ++k)
    if (edge_vec[k].squaredNorm() > edge_vec[longest].squaredNorm()) longest = k;
  const double longest2 = edge_vec[longest].squaredNorm();
  if (!(area > 1e-14 * longest2))
    throw DegenerateTriangle("facet area vanishes relative to its longest edge");

  FacetFrame frame;
  frame.origin = v0;
  frame.n_h = cross / (2.0 * area);
  frame.t1 = edge_vec[longest].normalized();
  frame.t2 = frame.n_h.cross(frame.t1);  // right-handed: t1 x t2 = n_h
  frame.area = area;
  frame.jacobian << frame.t1.dot(e1), frame.t1.dot(e2),
                    frame.t2.dot(e1), frame.t2.dot(e2);
  frame.jacobian_inv = frame.jacobian.inverse();
  return frame;
}

P2Eval reference_p2(const Vec3& barycentric) {
  const double l0 = barycentric[0], l1 = barycentric[1], l2 = barycentric[2];
  P2Eval eval;
  eval.value = {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
                4.0 * l1 * l2, 4.0 * l2 * l0, 4.0 * l0 * l1};
  // Reference coordinates: lambda0 = 1 - xi1 - xi2, lambda1 = xi1, lambda2 = xi2.
  eval.grad = {Vec2(1.0 - 4.0 * l0, 1.0 - 4.0 * l0),
               Vec2(4.0 * l1 - 1.0, 0.0),
               Vec2(0.0, 4.0 * l2 - 1.0),
               Vec2(4.0 * l2, 4.0 * l1),
               Vec2(-4.0 * l2, 4.0 * (l0 - l2)),
               Vec2(4.0 * (l0 - l1), -4.0 * l1)};
  return eval;
}

FacetOperators facet_operators(const FacetFrame& frame) {
  FacetOperators ops;
  ops.frame = frame;
  Eigen::Matrix<double, 3, 2> tangents;
  tangents.col(0) = frame.t1;
  tangents.col(1) = frame.t2;
  ops.push = tangents * frame.jacobian_inv.transpose();

  // Constant reference Hessians of the quadratic basis.
  static const std::array<Mat2, 6> ref_hessian = [] {
    std::array<Mat2, 6> h;
    h[0] << 4, 4, 4, 4;
    h[1] << 4, 0, 0, 0;
    h[2] << 0, 0, 0, 4;
    h[3] << 0, 4, 4, 0;
    h[4] << 0, -4, -4, -8;
    h[5] << -8, -4, -4, 0;
    return h;
  }();
  for (int i = 0; i < 6; ++i) {
    const Mat2 in_plane =
        frame.jacobian_inv.transpose() * ref_hessian[i] * frame.jacobian_inv;
    ops.laplacian[i] = in_plane.trace();
  }
  return ops;
}

std::array<Vec3, 6> FacetOperators::gradients(const Vec3& barycentric) const {
  const P2Eval eval = reference_p2(barycentric);
  std::array<Vec3, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = push * eval.grad[i];
  return out;
}

const TriangleRule& triangle_rule() {
  // Symmetric 12-point rule of degree 6; weights normalized to the reference
  // area 1/2. Orbit data (weight, barycentric abscissae) for a unit-area
  // normalization, halved below.
  static const TriangleRule rule = [] {
    TriangleRule r;
    auto push = [&r](double w, double a, double b, double c) {
      r.barycentric.emplace_back(a, b, c);
      r.weights.push_back(0.5 * w);
    };
    auto orbit3 = [&push](double w, double a) {
      const double b = 1.0 - 2.0 * a;
      push(w, a, a, b);
      push(w, a, b, a);
      push(w, b, a, a);
    };
    auto orbit6 = [&push](double w, double a, double b) {
      const double c = 1.0 - a - b;
      push(w, a, b, c);
      push(w, a, c, b);
      push(w, b, a, c);
      push(w, b, c, a);
      push(w, c, a, b);
      push(w, c, b, a);
    };
    orbit3(0.050844906370207, 0.063089014491502);
    orbit3(0.116786275726379, 0.249286745170910);
    orbit6(0.082851075618374, 0.053145049844816, 0.310352451033785);
    return r;
  }();
  return rule;
}

const EdgeRule& edge_rule() {
  // 4-point Gauss-Legendre mapped from [-1, 1] to [0, 1].
  static const EdgeRule rule = [] {
    const double x1 = 0.3399810435848563, x2 = 0.8611363115940526;
    const double w1 = 0.6521451548625461, w2 = 0.3478548451374538;
    EdgeRule r;
    r.points = {0.5 * (1.0 - x2), 0.5 * (1.0 - x1), 0.5 * (1.0 + x1), 0.5 * (1.0 + x2)};
    r.weights = {0.5 * w2, 0.5 * w1, 0.5 * w1, 0.5 * w2};
    return r;
  }();
  return rule;
}

}  // namespace cdg
