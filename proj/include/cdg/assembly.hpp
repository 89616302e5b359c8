#pragma once

#include "cdg/femspace.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>

namespace cdg {

/// Length scale used in the edge-penalty weight beta / h:
/// the global max edge length, or each edge's own length.
enum class HMode { GlobalH, PerEdge };

/// Kernel execution policy. Parallel computes local matrices concurrently
/// (OpenMP) into preallocated slots and scatters them serially in a fixed
/// order, so it is bit-identical to Serial for any thread count; Serial is
/// the reference implementation kept for testing and benchmarking.
enum class Execution { Serial, Parallel };

using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix12 = Eigen::Matrix<double, 12, 12>;

/// Assembled bilinear form: stiffness A (exactly symmetric, constants in its
/// kernel), the integrals m_i of the basis functions, the facet surface area,
/// and the penalty configuration used.
struct SparseSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd m;
  double area = 0.0;
  double beta = 0.0;
  double h_used = 0.0;
};

/// Element stiffness: M_ij = area * L_i * L_j with the constant facet
/// Laplacians L (the integrand is constant, so this is exact). Symmetric
/// positive semidefinite of rank <= 1.
Matrix6 element_matrix(const FacetOperators& ops);

/// Barycentric coordinates inside `face` of the point at parameter t on the
/// edge from global vertex gv0 to gv1 (facets are planar and share the edge
/// exactly, so this mapping is exact).
Vec3 edge_barycentric(const std::array<int, 3>& face, int gv0, int gv1, double t);

/// The two ingredients of the 12x12 edge coupling over the stacked dofs of
/// face+ then face- (shared edge dofs map to the same global indices and
/// merge during scatter):
///   consistency = -(average Laplacian) x (gradient jump) - its transpose,
///   penalty     = (gradient jump) x (gradient jump), *without* the beta/h factor.
/// The gradient jump uses the edge-normal identity
/// nu_E . [grad w] = nu+ . grad w+ + nu- . grad w-.
struct EdgeMatrixParts {
  Matrix12 consistency;
  Matrix12 penalty;
};
EdgeMatrixParts edge_matrix_parts(const TriangleMesh& mesh, const EdgeAdjacency& edge,
                                  const FacetOperators& ops_plus,
                                  const FacetOperators& ops_minus);

/// Full edge coupling: consistency + (beta / h_penalty) * penalty.
Matrix12 edge_matrix(const TriangleMesh& mesh, const EdgeAdjacency& edge,
                     const FacetOperators& ops_plus, const FacetOperators& ops_minus,
                     double beta, double h_penalty);

/// Assemble stiffness and basis integrals over the whole mesh.
SparseSystem assemble(const TriangleMesh& mesh, const Adjacency& adjacency,
                      const DofMap& dofmap, double beta,
                      HMode h_mode = HMode::GlobalH,
                      Execution execution = Execution::Parallel);

/// Load vector of the mean-corrected right-hand side: first the mean
/// c = |mesh|^-1 * integral of f(p(x)), then b_i = integral of
/// (f(p(x)) - c) phi_i, which makes b orthogonal to constants.
struct LoadVector {
  Eigen::VectorXd b;
  double mean_correction = 0.0;
};
LoadVector load_vector(const TriangleMesh& mesh, const Adjacency& adjacency,
                       const DofMap& dofmap, const std::function<double(const Vec3&)>& f,
                       Execution execution = Execution::Parallel);

/// Solve the saddle system [[A, m], [m^T, 0]] [u; lambda] = [b; 0] by sparse
/// LU with iterative refinement.  Throws SolverBreakdown when the relative
/// residual ||A u + lambda m - b|| / ||b|| exceeds 1e-9 or the mean constraint
/// |m^T u| / (||m|| ||u||) exceeds 1e-10.
struct SolveResult {
  Eigen::VectorXd u;
  double lambda = 0.0;
  double residual = 0.0;    // ||A u + lambda m - b|| / ||b||
  double constraint = 0.0;  // |m^T u| / (||m|| ||u||)
};
SolveResult solve(const SparseSystem& system, const Eigen::VectorXd& b);

/// Coordinate-format dump ("i j value" per nonzero, 0-based indices).
void write_sparse_coordinates(const Eigen::SparseMatrix<double>& A, std::ostream& out);

}  // namespace cdg
