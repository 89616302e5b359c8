#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdg/assembly.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace cdg;

namespace {

// ---------------------------------------------------------------------------
// Brute-force oracle for the two-facet square, built from nothing but
// monomial algebra: each quadratic basis function is found by inverting a
// 6x6 Vandermonde system in (1, x, y, x^2, xy, y^2), and all derivatives are
// evaluated from those coefficients directly.
// ---------------------------------------------------------------------------

struct FlatQuadratic {
  // Coefficients of 1, x, y, x^2, xy, y^2 for each of the six basis functions.
  Eigen::Matrix<double, 6, 6> coeff;

  static FlatQuadratic fit(const std::array<Eigen::Vector2d, 3>& v) {
    const std::array<Eigen::Vector2d, 6> nodes = {
        v[0], v[1], v[2], 0.5 * (v[1] + v[2]), 0.5 * (v[0] + v[2]),
        0.5 * (v[0] + v[1])};
    Eigen::Matrix<double, 6, 6> vander;
    for (int k = 0; k < 6; ++k) {
      const double x = nodes[k][0], y = nodes[k][1];
      vander.row(k) << 1.0, x, y, x * x, x * y, y * y;
    }
    FlatQuadratic q;
    q.coeff = vander.fullPivLu().solve(Eigen::Matrix<double, 6, 6>::Identity());
    return q;  // column i = coefficients of basis function i
  }

  double laplacian(int i) const { return 2.0 * coeff(3, i) + 2.0 * coeff(5, i); }

  Eigen::Vector2d gradient(int i, const Eigen::Vector2d& p) const {
    const auto& c = coeff.col(i);
    return {c[1] + 2.0 * c[3] * p[0] + c[4] * p[1],
            c[2] + c[4] * p[0] + 2.0 * c[5] * p[1]};
  }
};

// Two right triangles tiling the unit square in the z = 0 plane, meeting
// along the diagonal from (1,0) to (0,1).
struct SquareFixture {
  TriangleMesh mesh{ImplicitSurface::sphere(1.0), {}, {}};  // surface is irrelevant here
  EdgeAdjacency edge;
  FlatQuadratic plus, minus;

  SquareFixture() {
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    mesh.faces = {{0, 1, 2}, {1, 3, 2}};

    edge.v0 = 1;
    edge.v1 = 2;
    edge.face_plus = 0;
    edge.face_minus = 1;
    edge.local_plus = 0;   // opposite vertex 0 of face {0,1,2}
    edge.local_minus = 1;  // opposite vertex 3 of face {1,3,2}
    edge.midpoint = Vec3(0.5, 0.5, 0);
    edge.length = std::sqrt(2.0);
    edge.conormal_plus = Vec3(1, 1, 0).normalized();
    edge.conormal_minus = Vec3(-1, -1, 0).normalized();
    edge.edge_normal = (edge.conormal_plus - edge.conormal_minus) /
                       (1.0 - edge.conormal_plus.dot(edge.conormal_minus));

    plus = FlatQuadratic::fit({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                               Eigen::Vector2d(0, 1)});
    minus = FlatQuadratic::fit({Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1),
                                Eigen::Vector2d(0, 1)});
  }

  // Jump and average of the stacked 12 dofs at edge parameter t, where the
  // edge runs from (1,0) at t=0 to (0,1) at t=1.
  double jump(int k, double t) const {
    const Eigen::Vector2d p(1.0 - t, t);
    if (k < 6)
      return edge.conormal_plus.head<2>().dot(plus.gradient(k, p));
    return edge.conormal_minus.head<2>().dot(minus.gradient(k - 6, p));
  }
  double avg_laplacian(int k) const {
    return 0.5 * (k < 6 ? plus.laplacian(k) : minus.laplacian(k - 6));
  }

  EdgeMatrixParts oracle() const {
    EdgeMatrixParts parts;
    parts.consistency.setZero();
    parts.penalty.setZero();
    const auto& rule = edge_rule();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const double w = rule.weights[q] * edge.length;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
          parts.consistency(i, j) -=
              w * (avg_laplacian(i) * jump(j, t) + jump(i, t) * avg_laplacian(j));
          parts.penalty(i, j) += w * jump(i, t) * jump(j, t);
        }
    }
    return parts;
  }
};

Eigen::VectorXd ones(int n) { return Eigen::VectorXd::Ones(n); }

// Smallest eigenvalue of A restricted to the hyperplane m^T u = 0.
double min_constrained_eigenvalue(const SparseSystem& system) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(system.A);
  const int n = static_cast<int>(A.rows());
  Eigen::MatrixXd m(n, 1);
  m.col(0) = system.m;
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd basis = Q.rightCols(n - 1);
  const Eigen::MatrixXd reduced = basis.transpose() * A * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(reduced);
  return eig.eigenvalues().minCoeff();
}

struct Assembled {
  TriangleMesh mesh{ImplicitSurface::sphere(1.0), {}, {}};
  Adjacency adjacency;
  DofMap dofmap;
  SparseSystem system;
};

Assembled assemble_on(const ImplicitSurface& surface, int resolution, double beta,
                      HMode h_mode = HMode::GlobalH,
                      Execution execution = Execution::Parallel) {
  Assembled out;
  out.mesh = generate_mesh(surface, resolution);
  out.adjacency = build_adjacency(out.mesh);
  out.dofmap = build_dofmap(out.mesh, out.adjacency);
  out.system = assemble(out.mesh, out.adjacency, out.dofmap, beta, h_mode, execution);
  return out;
}

}  // namespace

TEST_CASE("element matrix: rank one, kernel of constants, hand-checked values") {
  const auto ops =
      facet_operators(facet_frame(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)));
  const Matrix6 M = element_matrix(ops);

  // area * L L^T with L = (8, 4, 4, 0, -8, -8) and area 1/2.
  Eigen::Matrix<double, 6, 1> L;
  L << 8, 4, 4, 0, -8, -8;
  const Matrix6 expected = 0.5 * L * L.transpose();
  CHECK((M - expected).norm() <= 1e-12 * expected.norm());

  CHECK((M - M.transpose()).norm() == 0.0);
  CHECK((M * ones(6)).norm() <= 1e-11 * M.norm());

  Eigen::SelfAdjointEigenSolver<Matrix6> eig(M);
  CHECK(eig.eigenvalues().maxCoeff() ==
        doctest::Approx(0.5 * L.squaredNorm()).epsilon(1e-12));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(eig.eigenvalues()[i]) <= 1e-10);
}

TEST_CASE("edge barycentric mapping reproduces points on the edge") {
  const auto mesh = generate_mesh(ImplicitSurface::sphere(1.0), 1);
  const auto adj = build_adjacency(mesh);
  for (const auto& e : adj.edges) {
    for (double t : {0.0, 0.25, 0.7, 1.0}) {
      for (int face : {e.face_plus, e.face_minus}) {
        const Vec3 bary = edge_barycentric(mesh.faces[face], e.v0, e.v1, t);
        CHECK(std::abs(bary.sum() - 1.0) <= 1e-14);
        Vec3 point = Vec3::Zero();
        for (int k = 0; k < 3; ++k)
          point += bary[k] * mesh.vertices[mesh.faces[face][k]];
        const Vec3 expected =
            (1.0 - t) * mesh.vertices[e.v0] + t * mesh.vertices[e.v1];
        CHECK((point - expected).norm() <= 1e-14);
      }
    }
  }
}

TEST_CASE("edge coupling matches the monomial brute-force oracle") {
  const SquareFixture fix;
  const auto ops_plus = facet_operators(facet_frame(
      fix.mesh.vertices[0], fix.mesh.vertices[1], fix.mesh.vertices[2]));
  const auto ops_minus = facet_operators(facet_frame(
      fix.mesh.vertices[1], fix.mesh.vertices[3], fix.mesh.vertices[2]));

  const auto parts = edge_matrix_parts(fix.mesh, fix.edge, ops_plus, ops_minus);
  const auto expected = fix.oracle();

  CHECK((parts.consistency - expected.consistency).norm() <=
        1e-12 * expected.consistency.norm());
  CHECK((parts.penalty - expected.penalty).norm() <= 1e-12 * expected.penalty.norm());

  const double beta = 10.0, h = 1.0;
  const Matrix12 full =
      edge_matrix(fix.mesh, fix.edge, ops_plus, ops_minus, beta, h);
  const Matrix12 recombined = parts.consistency + (beta / h) * parts.penalty;
  CHECK((full - recombined).norm() <= 1e-13 * recombined.norm());

  CHECK((parts.consistency - parts.consistency.transpose()).norm() == 0.0);
  CHECK((parts.penalty - parts.penalty.transpose()).norm() <=
        1e-14 * parts.penalty.norm());
}

TEST_CASE("coplanar facets: globally smooth quadratics see no jump") {
  const SquareFixture fix;
  const auto ops_plus = facet_operators(facet_frame(
      fix.mesh.vertices[0], fix.mesh.vertices[1], fix.mesh.vertices[2]));
  const auto ops_minus = facet_operators(facet_frame(
      fix.mesh.vertices[1], fix.mesh.vertices[3], fix.mesh.vertices[2]));
  const auto parts = edge_matrix_parts(fix.mesh, fix.edge, ops_plus, ops_minus);

  // Interpolate c(x, y) = x^2 + 0.5 x y - y + 2 on both facets.
  auto c = [](const Vec3& p) {
    return p[0] * p[0] + 0.5 * p[0] * p[1] - p[1] + 2.0;
  };
  auto face_dofs = [&](const std::array<int, 3>& f) {
    const Vec3& a = fix.mesh.vertices[f[0]];
    const Vec3& b = fix.mesh.vertices[f[1]];
    const Vec3& d = fix.mesh.vertices[f[2]];
    Eigen::Matrix<double, 6, 1> vals;
    vals << c(a), c(b), c(d), c(0.5 * (b + d)), c(0.5 * (a + d)), c(0.5 * (a + b));
    return vals;
  };
  Eigen::Matrix<double, 12, 1> stacked;
  stacked << face_dofs(fix.mesh.faces[0]), face_dofs(fix.mesh.faces[1]);

  // The gradient jump of a globally quadratic function vanishes identically,
  // so the penalty annihilates it and its consistency energy is zero...
  CHECK((parts.penalty * stacked).norm() <= 1e-12);
  CHECK(std::abs(stacked.dot(parts.consistency * stacked)) <= 1e-11);
  // ...but the consistency *matrix* does not annihilate it: test functions
  // still feel -(jump of test) x (average Laplacian of c) = -2 here.
  CHECK((parts.consistency * stacked).norm() > 0.1);
}

TEST_CASE("assembled stiffness: exact symmetry, constants in the kernel") {
  for (const auto& surface :
       {ImplicitSurface::sphere(1.0), ImplicitSurface::torus(1.0, 0.6)}) {
    const auto a = assemble_on(surface, 1, 10.0);
    const Eigen::SparseMatrix<double> At = a.system.A.transpose();
    CHECK((a.system.A - At).norm() == 0.0);
    CHECK((a.system.A * ones(a.dofmap.ndof)).norm() <= 1e-10 * a.system.A.norm());
    CHECK(a.system.m.sum() == doctest::Approx(a.system.area).epsilon(1e-12));
    CHECK(a.system.beta == 10.0);
  }
}

TEST_CASE("penalty keeps the form positive on the mean-zero space") {
  // Icosahedron, beta = 10: smallest constrained eigenvalue is comfortably
  // positive; starving the penalty (beta = 0.01) drives the form indefinite.
  const auto strong = assemble_on(ImplicitSurface::sphere(1.0), 0, 10.0);
  const double lo = min_constrained_eigenvalue(strong.system);
  CHECK(lo > 0.0);
  CHECK(lo == doctest::Approx(2.87217).epsilon(1e-3));

  const auto weak = assemble_on(ImplicitSurface::sphere(1.0), 0, 0.01);
  CHECK(min_constrained_eigenvalue(weak.system) < -100.0);
}

TEST_CASE("doubling beta only adds energy") {
  const auto base = assemble_on(ImplicitSurface::sphere(1.0), 0, 5.0);
  const auto doubled = assemble_on(ImplicitSurface::sphere(1.0), 0, 10.0);
  const Eigen::MatrixXd diff =
      Eigen::MatrixXd(doubled.system.A) - Eigen::MatrixXd(base.system.A);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * diff.norm());
  CHECK(eig.eigenvalues().maxCoeff() > 0.0);
}

TEST_CASE("per-edge penalty dominates the global-h penalty") {
  // 1/h_edge >= 1/h_max edge by edge, so the difference of the two assembled
  // forms is positive semidefinite; on the torus grid the edge lengths vary,
  // so the difference is genuinely nonzero.
  const auto global = assemble_on(ImplicitSurface::torus(1.0, 0.6), 1, 10.0,
                                  HMode::GlobalH);
  const auto per_edge = assemble_on(ImplicitSurface::torus(1.0, 0.6), 1, 10.0,
                                    HMode::PerEdge);
  CHECK(global.system.h_used == doctest::Approx(mesh_size(global.mesh).h));
  const Eigen::MatrixXd diff =
      Eigen::MatrixXd(per_edge.system.A) - Eigen::MatrixXd(global.system.A);
  CHECK(diff.norm() > 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * diff.norm());
}

TEST_CASE("load vector: mean correction and orthogonality to constants") {
  const auto a = assemble_on(ImplicitSurface::sphere(1.0), 2, 10.0);

  const auto constant =
      load_vector(a.mesh, a.adjacency, a.dofmap, [](const Vec3&) { return 3.0; });
  CHECK(constant.mean_correction == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(constant.b.norm() <= 1e-12 * a.system.area);

  // f = z over the sphere integrates to zero, so no correction is needed,
  // and the corrected load is orthogonal to constants either way.
  const auto odd =
      load_vector(a.mesh, a.adjacency, a.dofmap, [](const Vec3& x) { return x[2]; });
  CHECK(std::abs(odd.mean_correction) <= 1e-12);
  CHECK(std::abs(odd.b.sum()) <= 1e-10 * odd.b.lpNorm<1>());
}

TEST_CASE("saddle solve: zero load, manufactured reconstruction, certificates") {
  const auto a = assemble_on(ImplicitSurface::sphere(1.0), 1, 10.0);
  const int n = a.dofmap.ndof;

  const auto trivial = solve(a.system, Eigen::VectorXd::Zero(n));
  CHECK(trivial.u.norm() == 0.0);
  CHECK(trivial.lambda == 0.0);

  // Manufacture a mean-zero coefficient vector and recover it from its image.
  std::mt19937_64 rng(7);
  Eigen::VectorXd target(n);
  for (int i = 0; i < n; ++i) target[i] = 2.0 * uniform01(rng) - 1.0;
  target -= (a.system.m.dot(target) / a.system.m.sum()) * ones(n);
  const Eigen::VectorXd rhs = a.system.A * target;
  const auto rec = solve(a.system, rhs);
  CHECK((rec.u - target).norm() <= 1e-8 * target.norm());
  CHECK(std::abs(rec.lambda) <= 1e-8 * rhs.norm());
  CHECK(rec.residual <= 1e-9);
  CHECK(rec.constraint <= 1e-10);

  // A genuine load on a finer mesh: certificates stay within contract.
  const auto fine = assemble_on(ImplicitSurface::sphere(1.0), 2, 10.0);
  const auto load = load_vector(fine.mesh, fine.adjacency, fine.dofmap,
                                [](const Vec3& x) { return x[2]; });
  const auto sol = solve(fine.system, load.b);
  CHECK(sol.residual <= 1e-9);
  CHECK(sol.constraint <= 1e-10);
  CHECK(sol.u.norm() > 0.0);
}

TEST_CASE("parallel assembly is bit-identical to the serial reference") {
  const auto structured = generate_mesh(ImplicitSurface::torus(1.0, 0.6), 2);
  const auto mesh = perturb_vertices(structured, 0.2, 5);
  const auto adj = build_adjacency(mesh);
  const auto dofs = build_dofmap(mesh, adj);

  const auto serial = assemble(mesh, adj, dofs, 10.0, HMode::PerEdge, Execution::Serial);
  const auto parallel =
      assemble(mesh, adj, dofs, 10.0, HMode::PerEdge, Execution::Parallel);
  CHECK((serial.A - parallel.A).norm() == 0.0);
  CHECK((serial.m - parallel.m).norm() == 0.0);
  CHECK(serial.area == parallel.area);

  auto f = [](const Vec3& x) { return std::sin(3.0 * x[0]) + x[1] * x[2]; };
  const auto load_s = load_vector(mesh, adj, dofs, f, Execution::Serial);
  const auto load_p = load_vector(mesh, adj, dofs, f, Execution::Parallel);
  CHECK((load_s.b - load_p.b).norm() == 0.0);
  CHECK(load_s.mean_correction == load_p.mean_correction);
}

TEST_CASE("coordinate dump roundtrips exactly") {
  const auto a = assemble_on(ImplicitSurface::sphere(1.0), 0, 10.0);
  std::ostringstream out;
  write_sparse_coordinates(a.system.A, out);

  std::istringstream in(out.str());
  std::vector<Eigen::Triplet<double>> triplets;
  long i = 0, j = 0;
  double v = 0.0;
  while (in >> i >> j >> v) triplets.emplace_back(i, j, v);
  CHECK(static_cast<long>(triplets.size()) == a.system.A.nonZeros());

  Eigen::SparseMatrix<double> back(a.system.A.rows(), a.system.A.cols());
  back.setFromTriplets(triplets.begin(), triplets.end());
  CHECK((back - a.system.A).norm() == 0.0);
}
