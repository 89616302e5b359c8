#include "cdg/assembly.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <ostream>

namespace cdg {

Vec3 edge_barycentric(const std::array<int, 3>& face, int gv0, int gv1, double t) {
  Vec3 bary = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    if (face[k] == gv0) bary[k] = 1.0 - t;
    if (face[k] == gv1) bary[k] = t;
  }
  return bary;
}

namespace {

std::vector<FacetOperators> build_operators(const TriangleMesh& mesh,
                                            Execution execution) {
  const int nfaces = static_cast<int>(mesh.faces.size());
  std::vector<FacetOperators> ops(nfaces);
  auto kernel = [&](int f) {
    const auto& tri = mesh.faces[f];
    ops[f] = facet_operators(facet_frame(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                         mesh.vertices[tri[2]]));
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nfaces; ++f) kernel(f);
  } else {
    for (int f = 0; f < nfaces; ++f) kernel(f);
  }
  return ops;
}

}  // namespace

Matrix6 element_matrix(const FacetOperators& ops) {
  Matrix6 M;
  const double area = ops.frame.area;
  // area * (L_i * L_j): the inner product is computed once per unordered
  // pair in exact arithmetic order, keeping M bitwise symmetric.
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      M(i, j) = area * (ops.laplacian[i] * ops.laplacian[j]);
  return M;
}

EdgeMatrixParts edge_matrix_parts(const TriangleMesh& mesh, const EdgeAdjacency& edge,
                                  const FacetOperators& ops_plus,
                                  const FacetOperators& ops_minus) {
  const auto& face_p = mesh.faces[edge.face_plus];
  const auto& face_m = mesh.faces[edge.face_minus];

  // Average-Laplacian row: constant along the edge.
  Eigen::Matrix<double, 12, 1> avg;
  for (int i = 0; i < 6; ++i) {
    avg[i] = 0.5 * ops_plus.laplacian[i];
    avg[6 + i] = 0.5 * ops_minus.laplacian[i];
  }

  EdgeMatrixParts parts;
  parts.consistency.setZero();
  parts.penalty.setZero();
  const EdgeRule& rule = edge_rule();
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const double t = rule.points[q];
    const double weight = rule.weights[q] * edge.length;

    // Gradient-jump row via nu_E . [grad w] = nu+ . grad w+ + nu- . grad w-.
    Eigen::Matrix<double, 12, 1> jump;
    const auto grad_p = ops_plus.gradients(edge_barycentric(face_p, edge.v0, edge.v1, t));
    const auto grad_m = ops_minus.gradients(edge_barycentric(face_m, edge.v0, edge.v1, t));
    for (int i = 0; i < 6; ++i) {
      jump[i] = edge.conormal_plus.dot(grad_p[i]);
      jump[6 + i] = edge.conormal_minus.dot(grad_m[i]);
    }

    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) {
        parts.consistency(i, j) -= weight * (avg[i] * jump[j] + jump[i] * avg[j]);
        parts.penalty(i, j) += weight * (jump[i] * jump[j]);
      }
    }
  }
  return parts;
}

Matrix12 edge_matrix(const TriangleMesh& mesh, const EdgeAdjacency& edge,
                     const FacetOperators& ops_plus, const FacetOperators& ops_minus,
                     double beta, double h_penalty) {
  const EdgeMatrixParts parts = edge_matrix_parts(mesh, edge, ops_plus, ops_minus);
  return parts.consistency + (beta / h_penalty) * parts.penalty;
}

SparseSystem assemble(const TriangleMesh& mesh, const Adjacency& adjacency,
                      const DofMap& dofmap, double beta, HMode h_mode,
                      Execution execution) {
  const int nfaces = static_cast<int>(mesh.faces.size());
  const int nedges = static_cast<int>(adjacency.edges.size());
  const double h_global = mesh_size(mesh).h;
  const std::vector<FacetOperators> ops = build_operators(mesh, execution);

  const TriangleRule& rule = triangle_rule();
  const int nq = static_cast<int>(rule.barycentric.size());
  std::vector<std::array<double, 6>> basis_values(nq);
  for (int q = 0; q < nq; ++q) basis_values[q] = reference_p2(rule.barycentric[q]).value;

  // Local matrices into preallocated slots; parallel and serial execution are
  // bit-identical because each slot is an independent pure computation and
  // the scatter below is always serial and ordered.
  std::vector<Matrix6> element(nfaces);
  std::vector<Matrix12> edge(nedges);
  std::vector<Eigen::Matrix<double, 6, 1>> mass(nfaces);

  auto element_kernel = [&](int f) {
    element[f] = element_matrix(ops[f]);
    Eigen::Matrix<double, 6, 1> mloc = Eigen::Matrix<double, 6, 1>::Zero();
    const double scale = 2.0 * ops[f].frame.area;
    for (int q = 0; q < nq; ++q)
      for (int i = 0; i < 6; ++i) mloc[i] += scale * rule.weights[q] * basis_values[q][i];
    mass[f] = mloc;
  };
  auto edge_kernel = [&](int e) {
    const EdgeAdjacency& ea = adjacency.edges[e];
    const double h_pen = h_mode == HMode::GlobalH ? h_global : ea.length;
    edge[e] = edge_matrix(mesh, ea, ops[ea.face_plus], ops[ea.face_minus], beta, h_pen);
  };

  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nfaces; ++f) element_kernel(f);
#pragma omp parallel for schedule(static)
    for (int e = 0; e < nedges; ++e) edge_kernel(e);
  } else {
    for (int f = 0; f < nfaces; ++f) element_kernel(f);
    for (int e = 0; e < nedges; ++e) edge_kernel(e);
  }

  // Serial scatter in fixed (face, then edge) order. Off-diagonal values are
  // emitted as mirrored triplet pairs, so A(i,j) and A(j,i) accumulate the
  // same values in the same order: the assembled matrix is symmetric exactly,
  // not merely up to rounding.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(nfaces) * 36 + static_cast<size_t>(nedges) * 144);
  auto add_symmetric = [&triplets](int gi, int gj, double value) {
    triplets.emplace_back(gi, gj, value);
    triplets.emplace_back(gj, gi, value);
  };

  SparseSystem system;
  system.m = Eigen::VectorXd::Zero(dofmap.ndof);
  system.area = 0.0;
  for (int f = 0; f < nfaces; ++f) {
    const auto& dofs = dofmap.face_dofs[f];
    for (int i = 0; i < 6; ++i) {
      system.m[dofs[i]] += mass[f][i];
      triplets.emplace_back(dofs[i], dofs[i], element[f](i, i));
      for (int j = i + 1; j < 6; ++j) add_symmetric(dofs[i], dofs[j], element[f](i, j));
    }
    system.area += ops[f].frame.area;
  }
  for (int e = 0; e < nedges; ++e) {
    const EdgeAdjacency& ea = adjacency.edges[e];
    std::array<int, 12> dofs;
    for (int i = 0; i < 6; ++i) {
      dofs[i] = dofmap.face_dofs[ea.face_plus][i];
      dofs[6 + i] = dofmap.face_dofs[ea.face_minus][i];
    }
    for (int i = 0; i < 12; ++i) {
      triplets.emplace_back(dofs[i], dofs[i], edge[e](i, i));
      for (int j = i + 1; j < 12; ++j) add_symmetric(dofs[i], dofs[j], edge[e](i, j));
    }
  }
  system.A.resize(dofmap.ndof, dofmap.ndof);
  system.A.setFromTriplets(triplets.begin(), triplets.end());
  system.A.makeCompressed();
  system.beta = beta;
  system.h_used = h_global;
  return system;
}

LoadVector load_vector(const TriangleMesh& mesh, const Adjacency& adjacency,
                       const DofMap& dofmap, const std::function<double(const Vec3&)>& f,
                       Execution execution) {
  const int nfaces = static_cast<int>(mesh.faces.size());
  const TriangleRule& rule = triangle_rule();
  const int nq = static_cast<int>(rule.barycentric.size());
  std::vector<std::array<double, 6>> basis_values(nq);
  for (int q = 0; q < nq; ++q) basis_values[q] = reference_p2(rule.barycentric[q]).value;

  // Pass 1: lift f through the closest-point map at every quadrature point
  // and integrate. Values are cached for pass 2; per-face partial sums are
  // reduced serially in face order so results do not depend on thread count.
  std::vector<double> values(static_cast<size_t>(nfaces) * nq);
  std::vector<double> face_integral(nfaces);
  auto pass1 = [&](int face) {
    const auto& tri = mesh.faces[face];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double scale = 2.0 * adjacency.face_geometry[face].area;
    double sum = 0.0;
    for (int q = 0; q < nq; ++q) {
      const Vec3& bary = rule.barycentric[q];
      const Vec3 x = bary[0] * a + bary[1] * b + bary[2] * c;
      const double value = f(closest_point(mesh.surface, x));
      values[static_cast<size_t>(face) * nq + q] = value;
      sum += scale * rule.weights[q] * value;
    }
    face_integral[face] = sum;
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int face = 0; face < nfaces; ++face) pass1(face);
  } else {
    for (int face = 0; face < nfaces; ++face) pass1(face);
  }
  double integral = 0.0, area = 0.0;
  for (int face = 0; face < nfaces; ++face) {
    integral += face_integral[face];
    area += adjacency.face_geometry[face].area;
  }
  const double mean = integral / area;

  // Pass 2: moments of the corrected density f - mean against the basis.
  std::vector<Eigen::Matrix<double, 6, 1>> moments(nfaces);
  auto pass2 = [&](int face) {
    const double scale = 2.0 * adjacency.face_geometry[face].area;
    Eigen::Matrix<double, 6, 1> mloc = Eigen::Matrix<double, 6, 1>::Zero();
    for (int q = 0; q < nq; ++q) {
      const double density = values[static_cast<size_t>(face) * nq + q] - mean;
      for (int i = 0; i < 6; ++i)
        mloc[i] += scale * rule.weights[q] * density * basis_values[q][i];
    }
    moments[face] = mloc;
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int face = 0; face < nfaces; ++face) pass2(face);
  } else {
    for (int face = 0; face < nfaces; ++face) pass2(face);
  }

  LoadVector load;
  load.b = Eigen::VectorXd::Zero(dofmap.ndof);
  load.mean_correction = mean;
  for (int face = 0; face < nfaces; ++face) {
    const auto& dofs = dofmap.face_dofs[face];
    for (int i = 0; i < 6; ++i) load.b[dofs[i]] += moments[face][i];
  }
  return load;
}

SolveResult solve(const SparseSystem& system, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(system.m.size());

  // Bordered saddle matrix [[A, m/s], [m^T/s, 0]] with s = |m|. The basis
  // integrals shrink like h^2 while the stiffness entries grow like h^-2, so
  // the raw border would be many orders of magnitude off the matrix scale on
  // fine meshes; normalizing it keeps the LU factors well conditioned. The
  // multiplier is rescaled back below, the constraint m^T u = 0 is unchanged.
  const double scale = system.m.norm() > 0.0 ? system.m.norm() : 1.0;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(system.A.nonZeros() + 2 * n);
  for (int col = 0; col < system.A.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(system.A, col); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
  for (int i = 0; i < n; ++i) {
    triplets.emplace_back(i, n, system.m[i] / scale);
    triplets.emplace_back(n, i, system.m[i] / scale);
  }
  Eigen::SparseMatrix<double> K(n + 1, n + 1);
  K.setFromTriplets(triplets.begin(), triplets.end());
  K.makeCompressed();

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = b;
  rhs[n] = 0.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw SolverBreakdown("sparse LU factorization of the saddle system failed");
  Eigen::VectorXd sol = lu.solve(rhs);

  // Residual of the bordered system with extended-precision accumulation.
  // Stiffness entries grow like h^-4 while the residual target is 1e-9, so a
  // plain double evaluation of rhs - K x cancels down to its own rounding
  // noise on fine meshes and both the refinement and the acceptance check
  // below would stall on measurement error instead of the true residual.
  auto residual = [&](const Eigen::VectorXd& x) {
    std::vector<long double> acc(n + 1, 0.0L);
    for (int i = 0; i <= n; ++i) acc[i] = static_cast<long double>(rhs[i]);
    for (int col = 0; col <= n; ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it)
        acc[it.row()] -= static_cast<long double>(it.value()) * x[col];
    Eigen::VectorXd r(n + 1);
    for (int i = 0; i <= n; ++i) r[i] = static_cast<double>(acc[i]);
    return r;
  };
  // Mixed-precision iterative refinement: extended residual, double solve.
  for (int sweep = 0; sweep < 3; ++sweep) sol += lu.solve(residual(sol));

  SolveResult result;
  result.u = sol.head(n);
  result.lambda = sol[n] / scale;
  // The first n rows of the bordered residual are exactly b - A u - lambda m;
  // row n holds -(m^T u) / s and is reported against ||m|| ||u||.
  const Eigen::VectorXd r = residual(sol);
  const double b_norm = b.norm();
  const double block_residual = r.head(n).norm();
  result.residual = b_norm > 0.0 ? block_residual / b_norm : block_residual;
  const double mtu = std::abs(r[n]) * scale;
  const double mu_scale = system.m.norm() * result.u.norm();
  result.constraint = mu_scale > 0.0 ? mtu / mu_scale : mtu;
  if (!(result.residual <= 1e-9))
    throw SolverBreakdown("saddle solve missed the 1e-9 residual tolerance");
  if (!(result.constraint <= 1e-10))
    throw SolverBreakdown("saddle solve missed the 1e-10 mean-constraint tolerance");
  return result;
}

void write_sparse_coordinates(const Eigen::SparseMatrix<double>& A, std::ostream& out) {
  char line[96];
  for (int col = 0; col < A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
      std::snprintf(line, sizeof line, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      out << line;
    }
  }
}

}  // namespace cdg
