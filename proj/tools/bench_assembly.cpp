// Benchmark of the OpenMP assembly kernels against the serial reference
// implementation, including a bitwise agreement check between the two.

#include "cdg/verify.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <string>

namespace {

template <typename F>
double best_of(int reps, F&& body) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const std::chrono::duration<double, std::milli> took =
        std::chrono::steady_clock::now() - start;
    best = std::min(best, took.count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  std::string problem = "sphere";
  int level = 4, reps = 3;
  double beta = 10.0;

  CLI::App app{"assembly benchmark: serial reference vs OpenMP kernels"};
  app.add_option("--problem", problem)->check(CLI::IsMember({"sphere", "torus"}));
  app.add_option("--level", level)->check(CLI::NonNegativeNumber);
  app.add_option("--reps", reps)->check(CLI::PositiveNumber);
  app.add_option("--beta", beta)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const cdg::ModelProblem model = cdg::make_problem(problem, cdg::LoadSource::Oracle);
  const cdg::TriangleMesh mesh = cdg::generate_mesh(model.surface, level);
  const cdg::Adjacency adjacency = cdg::build_adjacency(mesh);
  const cdg::DofMap dofmap = cdg::build_dofmap(mesh, adjacency);

  int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
#pragma omp single
  threads = omp_get_num_threads();
#endif
  std::printf("problem=%s level=%d faces=%zu ndof=%d threads=%d reps=%d\n", problem.c_str(),
              level, mesh.faces.size(), dofmap.ndof, threads, reps);

  cdg::SparseSystem serial_system, parallel_system;
  cdg::LoadVector serial_load, parallel_load;
  const double t_as = best_of(reps, [&] {
    serial_system = cdg::assemble(mesh, adjacency, dofmap, beta, cdg::HMode::GlobalH,
                                  cdg::Execution::Serial);
  });
  const double t_ap = best_of(reps, [&] {
    parallel_system = cdg::assemble(mesh, adjacency, dofmap, beta, cdg::HMode::GlobalH,
                                    cdg::Execution::Parallel);
  });
  const double t_ls = best_of(reps, [&] {
    serial_load =
        cdg::load_vector(mesh, adjacency, dofmap, model.f_load, cdg::Execution::Serial);
  });
  const double t_lp = best_of(reps, [&] {
    parallel_load =
        cdg::load_vector(mesh, adjacency, dofmap, model.f_load, cdg::Execution::Parallel);
  });

  std::printf("assemble     serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n", t_as,
              t_ap, t_as / t_ap);
  std::printf("load_vector  serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n", t_ls,
              t_lp, t_ls / t_lp);

  const double matrix_diff = (serial_system.A - parallel_system.A).norm();
  const double load_diff = (serial_load.b - parallel_load.b).norm();
  std::printf("|A_serial - A_parallel| = %.3e, |b_serial - b_parallel| = %.3e\n",
              matrix_diff, load_diff);
  if (matrix_diff > 1e-12 || load_diff > 1e-12) {
    std::printf("FAIL: serial and parallel kernels disagree\n");
    return 1;
  }
  std::printf("agreement OK (tolerance 1e-12)\n");
  return 0;
}
