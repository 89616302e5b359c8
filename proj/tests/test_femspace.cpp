#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cdg/femspace.hpp"
#include "cdg/mesh.hpp"

#include <cmath>
#include <random>
#include <set>
#include <vector>

using namespace cdg;

namespace {

// Exact double factorial values for the monomial integral formula.
double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

TEST_CASE("quadratic basis: Lagrange property at its six nodes") {
  // Vertices then edge midpoints opposite vertex 0, 1, 2 (barycentric).
  const std::array<Vec3, 6> nodes = {Vec3(1, 0, 0),       Vec3(0, 1, 0),
                                     Vec3(0, 0, 1),       Vec3(0, 0.5, 0.5),
                                     Vec3(0.5, 0, 0.5),   Vec3(0.5, 0.5, 0)};
  for (int j = 0; j < 6; ++j) {
    const auto eval = reference_p2(nodes[j]);
    for (int i = 0; i < 6; ++i)
      CHECK(eval.value[i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-14));
  }
}

TEST_CASE("quadratic basis: centroid values, partition of unity") {
  const auto at_centroid = reference_p2(Vec3(1, 1, 1) / 3.0);
  for (int i = 0; i < 3; ++i)
    CHECK(at_centroid.value[i] == doctest::Approx(-1.0 / 9.0).epsilon(1e-13));
  for (int i = 3; i < 6; ++i)
    CHECK(at_centroid.value[i] == doctest::Approx(4.0 / 9.0).epsilon(1e-13));

  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 1000; ++rep) {
    double l1 = uniform01(rng), l2 = uniform01(rng);
    if (l1 + l2 > 1.0) {
      l1 = 1.0 - l1;
      l2 = 1.0 - l2;
    }
    const auto eval = reference_p2(Vec3(1.0 - l1 - l2, l1, l2));
    double sum = 0.0;
    Vec2 grad_sum = Vec2::Zero();
    for (int i = 0; i < 6; ++i) {
      sum += eval.value[i];
      grad_sum += eval.grad[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-13);
    CHECK(grad_sum.norm() <= 1e-12);
  }
}

TEST_CASE("facet frame: orthonormal, right-handed, Jacobian = twice the area") {
  const auto mesh = generate_mesh(ImplicitSurface::torus(1.0, 0.6), 1);
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const auto frame = facet_frame(a, b, c);

    CHECK(std::abs(frame.t1.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(frame.t2.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(frame.t1.dot(frame.t2)) <= 1e-12);
    CHECK((frame.t1.cross(frame.t2) - frame.n_h).norm() <= 1e-12);

    const double area = 0.5 * (b - a).cross(c - a).norm();
    CHECK(frame.area == doctest::Approx(area).epsilon(1e-12));
    CHECK(frame.jacobian.determinant() == doctest::Approx(2.0 * area).epsilon(1e-12));
    CHECK((frame.jacobian * frame.jacobian_inv - Mat2::Identity()).norm() <= 1e-12);

    // Reference vertices map to the physical ones in frame coordinates.
    auto to_frame = [&](const Vec3& p) {
      return Vec2((p - frame.origin).dot(frame.t1), (p - frame.origin).dot(frame.t2));
    };
    CHECK((frame.jacobian * Vec2(1, 0) - to_frame(b)).norm() <= 1e-12);
    CHECK((frame.jacobian * Vec2(0, 1) - to_frame(c)).norm() <= 1e-12);
    CHECK(to_frame(a).norm() <= 1e-12);
  }
}

TEST_CASE("facet frame rejects collinear vertices") {
  CHECK_THROWS_AS(facet_frame(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)),
                  DegenerateTriangle);
}

TEST_CASE("affine functions: exact tangential gradients, zero Laplacians") {
  const auto mesh = generate_mesh(ImplicitSurface::sphere(1.0), 1);
  const Vec3 g(0.3, -1.2, 0.7);  // interpolate u(x) = g . x on each facet
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const auto ops = facet_operators(facet_frame(a, b, c));

    Eigen::Matrix<double, 6, 1> dofs;
    dofs << g.dot(a), g.dot(b), g.dot(c), g.dot(0.5 * (b + c)),
        g.dot(0.5 * (a + c)), g.dot(0.5 * (a + b));

    // Only the in-plane part of g is visible to the facet calculus.
    const Vec3 n = ops.frame.n_h;
    const Vec3 g_t = g - g.dot(n) * n;

    for (const auto& bary : triangle_rule().barycentric) {
      const auto grads = ops.gradients(bary);
      Vec3 grad = Vec3::Zero();
      for (int i = 0; i < 6; ++i) grad += dofs[i] * grads[i];
      CHECK((grad - g_t).norm() <= 1e-12);
    }
    double lap = 0.0;
    for (int i = 0; i < 6; ++i) lap += dofs[i] * ops.laplacian[i];
    CHECK(std::abs(lap) <= 1e-10);
  }
}

TEST_CASE("quadratics: facet Laplacian is exact and ordering independent") {
  // In the z = 0 plane, u = (x - 0.3)^2 + (y + 0.1)^2 has Laplacian 4.
  // Cyclic relabelings change the frame but must not change the value.
  const std::array<Vec3, 3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  auto u = [](const Vec3& x) {
    return (x[0] - 0.3) * (x[0] - 0.3) + (x[1] + 0.1) * (x[1] + 0.1);
  };
  for (const auto& perm : std::vector<std::array<int, 3>>{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}) {
    const Vec3 &a = v[perm[0]], &b = v[perm[1]], &c = v[perm[2]];
    const auto ops = facet_operators(facet_frame(a, b, c));
    Eigen::Matrix<double, 6, 1> dofs;
    dofs << u(a), u(b), u(c), u(0.5 * (b + c)), u(0.5 * (a + c)), u(0.5 * (a + b));
    double lap = 0.0;
    for (int i = 0; i < 6; ++i) lap += dofs[i] * ops.laplacian[i];
    CHECK(lap == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("unit right facet: hand-checked basis Laplacians") {
  // Vertices (0,0), (1,0), (0,1): the quadratic basis has constant facet
  // Laplacians (8, 4, 4, 0, -8, -8) in vertex/opposite-midpoint order.
  const auto ops =
      facet_operators(facet_frame(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)));
  const std::array<double, 6> expected = {8, 4, 4, 0, -8, -8};
  for (int i = 0; i < 6; ++i)
    CHECK(ops.laplacian[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("basis Laplacians and gradients sum to zero; gradients stay in plane") {
  const auto mesh = generate_mesh(ImplicitSurface::torus(1.0, 0.6), 1);
  const Vec3 centroid(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
  for (const auto& f : mesh.faces) {
    const auto ops = facet_operators(
        facet_frame(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
    double lap_sum = 0.0;
    for (double l : ops.laplacian) lap_sum += l;
    CHECK(std::abs(lap_sum) <= 1e-9);

    const auto grads = ops.gradients(centroid);
    Vec3 grad_sum = Vec3::Zero();
    for (const auto& gr : grads) grad_sum += gr;
    CHECK(grad_sum.norm() <= 1e-12);
    for (const auto& gr : grads)
      CHECK(std::abs(gr.dot(ops.frame.n_h)) <= 1e-12 * (1.0 + gr.norm()));
  }
}

TEST_CASE("triangle rule: positive weights, reference area, degree-6 monomials") {
  const auto& rule = triangle_rule();
  REQUIRE(rule.barycentric.size() == rule.weights.size());
  double wsum = 0.0;
  for (double w : rule.weights) {
    CHECK(w > 0.0);
    wsum += w;
  }
  CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
  for (const auto& bary : rule.barycentric) {
    CHECK(bary.minCoeff() >= 0.0);
    CHECK(std::abs(bary.sum() - 1.0) <= 1e-14);
  }

  // On the reference triangle: integral of l0^a l1^b l2^c equals
  // a! b! c! / (a+b+c+2)!.
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; a + b <= 6; ++b)
      for (int c = 0; a + b + c <= 6; ++c) {
        double quad = 0.0;
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
          const Vec3& l = rule.barycentric[q];
          quad += rule.weights[q] * std::pow(l[0], a) * std::pow(l[1], b) *
                  std::pow(l[2], c);
        }
        const double exact =
            factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
        CHECK(quad == doctest::Approx(exact).epsilon(1e-12));
      }
}

TEST_CASE("edge rule: positive weights, exact through degree seven") {
  const auto& rule = edge_rule();
  REQUIRE(rule.points.size() == rule.weights.size());
  double wsum = 0.0;
  for (double w : rule.weights) {
    CHECK(w > 0.0);
    wsum += w;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  for (double t : rule.points) {
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }
  for (int k = 0; k <= 7; ++k) {
    double quad = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q)
      quad += rule.weights[q] * std::pow(rule.points[q], k);
    CHECK(quad == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("dof map: counts, uniqueness, sharing across faces") {
  const auto mesh = generate_mesh(ImplicitSurface::sphere(1.0), 2);
  const auto adj = build_adjacency(mesh);
  const auto dofs = build_dofmap(mesh, adj);
  const auto stats = mesh_size(mesh);
  CHECK(dofs.ndof == stats.nvertices + stats.nedges);
  CHECK(dofs.nvertices == stats.nvertices);
  CHECK(dofs.nedges == stats.nedges);
  CHECK(static_cast<int>(dofs.face_dofs.size()) == stats.nfaces);

  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const auto& fd = dofs.face_dofs[fi];
    std::set<int> unique(fd.begin(), fd.end());
    CHECK(unique.size() == 6);
    for (int d : fd) {
      CHECK(d >= 0);
      CHECK(d < dofs.ndof);
    }
    // Vertex dofs come first and match the face's vertex indices.
    for (int i = 0; i < 3; ++i) CHECK(fd[i] == mesh.faces[fi][i]);
  }

  // Faces across an edge share exactly three dofs (two vertices + the edge),
  // and the shared edge dof occupies the right opposite-vertex slot.
  for (const auto& e : adj.edges) {
    const auto& dp = dofs.face_dofs[e.face_plus];
    const auto& dm = dofs.face_dofs[e.face_minus];
    int shared = 0;
    for (int a : dp)
      for (int b : dm)
        if (a == b) ++shared;
    CHECK(shared == 3);
    CHECK(dp[3 + e.local_plus] == dm[3 + e.local_minus]);
  }
}
