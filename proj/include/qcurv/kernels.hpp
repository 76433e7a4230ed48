#pragma once

// Data-parallel inner loops shared by every module. Each kernel has an
// OpenMP version (used by the library) and a plain serial reference kept for
// tests and benchmarks. Work is split into fixed-size blocks that do not
// depend on the thread count, so results are bit-identical for any
// QCURV_THREADS setting.

#include <Eigen/Dense>

namespace qcurv::kernels {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr Eigen::Index kRowBlock = 16;
inline constexpr Eigen::Index kDotChunk = 4096;

/// Cap the OpenMP worker count (values < 1 are ignored).
void set_thread_cap(int threads);
/// Apply QCURV_THREADS from the environment, if set.
void apply_thread_env();
int thread_count();

/// V = B1 * C * B2^T. B1: nodes1 x modes1, C: modes1 x modes2, B2: nodes2 x modes2.
RowMatrix tensor_synthesize(const RowMatrix& B1, const RowMatrix& C, const RowMatrix& B2);
RowMatrix tensor_synthesize_serial(const RowMatrix& B1, const RowMatrix& C, const RowMatrix& B2);

/// C = B1^T diag(w1) V diag(w2) B2 (quadrature projection onto the product basis).
RowMatrix tensor_analyze(const RowMatrix& B1, const Eigen::VectorXd& w1, const RowMatrix& V,
                         const Eigen::VectorXd& w2, const RowMatrix& B2);
RowMatrix tensor_analyze_serial(const RowMatrix& B1, const Eigen::VectorXd& w1,
                                const RowMatrix& V, const Eigen::VectorXd& w2,
                                const RowMatrix& B2);

/// A = L^T diag(w) R, the weighted Galerkin matrix of two nodal tables.
Eigen::MatrixXd weighted_gram(const RowMatrix& L, const Eigen::VectorXd& w, const RowMatrix& R);
Eigen::MatrixXd weighted_gram_serial(const RowMatrix& L, const Eigen::VectorXd& w,
                                     const RowMatrix& R);

/// sum_i w_i a_i b_i.
double weighted_dot(const Eigen::VectorXd& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double weighted_dot_serial(const Eigen::VectorXd& w, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b);

/// out_i = f(in_i).
template <class F>
Eigen::VectorXd map_values(const Eigen::VectorXd& in, F&& f) {
  Eigen::VectorXd out(in.size());
  const Eigen::Index n = in.size();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = f(in[i]);
  return out;
}

/// Runs body(i) for i in [0, n); iterations must be independent.
template <class F>
void parallel_for(Eigen::Index n, F&& body) {
#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index i = 0; i < n; ++i) body(i);
}

}  // namespace qcurv::kernels
