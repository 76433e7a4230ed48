#include "qcurv/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include <omp.h>

namespace qcurv::kernels {

void set_thread_cap(int threads) {
  if (threads >= 1) omp_set_num_threads(std::min(threads, omp_get_num_procs() * 4));
}

void apply_thread_env() {
  if (const char* env = std::getenv("QCURV_THREADS")) set_thread_cap(std::atoi(env));
}

int thread_count() { return omp_get_max_threads(); }

namespace {

// out = X * Y, computed in fixed row blocks of X.
RowMatrix blocked_product(const RowMatrix& X, const RowMatrix& Y) {
  RowMatrix out(X.rows(), Y.cols());
  const Eigen::Index blocks = (X.rows() + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index r0 = b * kRowBlock;
    const Eigen::Index nr = std::min(kRowBlock, X.rows() - r0);
    out.middleRows(r0, nr).noalias() = X.middleRows(r0, nr) * Y;
  }
  return out;
}

}  // namespace

RowMatrix tensor_synthesize(const RowMatrix& B1, const RowMatrix& C, const RowMatrix& B2) {
  const RowMatrix B2t = B2.transpose();
  const RowMatrix T = blocked_product(C, B2t);
  return blocked_product(B1, T);
}

RowMatrix tensor_synthesize_serial(const RowMatrix& B1, const RowMatrix& C, const RowMatrix& B2) {
  const Eigen::Index n1 = B1.rows(), m1 = B1.cols(), n2 = B2.rows(), m2 = B2.cols();
  RowMatrix T = RowMatrix::Zero(m1, n2);
  for (Eigen::Index i = 0; i < m1; ++i)
    for (Eigen::Index b = 0; b < n2; ++b) {
      double s = 0;
      for (Eigen::Index j = 0; j < m2; ++j) s += C(i, j) * B2(b, j);
      T(i, b) = s;
    }
  RowMatrix V = RowMatrix::Zero(n1, n2);
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index b = 0; b < n2; ++b) {
      double s = 0;
      for (Eigen::Index i = 0; i < m1; ++i) s += B1(a, i) * T(i, b);
      V(a, b) = s;
    }
  return V;
}

RowMatrix tensor_analyze(const RowMatrix& B1, const Eigen::VectorXd& w1, const RowMatrix& V,
                         const Eigen::VectorXd& w2, const RowMatrix& B2) {
  const RowMatrix B2w = w2.asDiagonal() * B2;
  const RowMatrix S = blocked_product(V, B2w);  // n1 x m2
  const RowMatrix B1wt = (w1.asDiagonal() * B1).transpose();
  return blocked_product(B1wt, S);
}

RowMatrix tensor_analyze_serial(const RowMatrix& B1, const Eigen::VectorXd& w1,
                                const RowMatrix& V, const Eigen::VectorXd& w2,
                                const RowMatrix& B2) {
  const Eigen::Index n1 = B1.rows(), m1 = B1.cols(), n2 = B2.rows(), m2 = B2.cols();
  RowMatrix S = RowMatrix::Zero(n1, m2);
  for (Eigen::Index a = 0; a < n1; ++a)
    for (Eigen::Index j = 0; j < m2; ++j) {
      double s = 0;
      for (Eigen::Index b = 0; b < n2; ++b) s += V(a, b) * w2[b] * B2(b, j);
      S(a, j) = s;
    }
  RowMatrix C = RowMatrix::Zero(m1, m2);
  for (Eigen::Index i = 0; i < m1; ++i)
    for (Eigen::Index j = 0; j < m2; ++j) {
      double s = 0;
      for (Eigen::Index a = 0; a < n1; ++a) s += w1[a] * B1(a, i) * S(a, j);
      C(i, j) = s;
    }
  return C;
}

Eigen::MatrixXd weighted_gram(const RowMatrix& L, const Eigen::VectorXd& w, const RowMatrix& R) {
  const RowMatrix Lwt = (w.asDiagonal() * L).transpose();
  return blocked_product(Lwt, R);
}

Eigen::MatrixXd weighted_gram_serial(const RowMatrix& L, const Eigen::VectorXd& w,
                                     const RowMatrix& R) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(L.cols(), R.cols());
  for (Eigen::Index i = 0; i < L.cols(); ++i)
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
      double s = 0;
      for (Eigen::Index n = 0; n < L.rows(); ++n) s += w[n] * L(n, i) * R(n, j);
      A(i, j) = s;
    }
  return A;
}

double weighted_dot(const Eigen::VectorXd& w, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = w.size();
  const Eigen::Index chunks = (n + kDotChunk - 1) / kDotChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index i0 = c * kDotChunk;
    const Eigen::Index len = std::min(kDotChunk, n - i0);
    double s = 0;
    for (Eigen::Index i = i0; i < i0 + len; ++i) s += w[i] * (a[i] * b[i]);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0;
  for (double p : partial) total += p;
  return total;
}

double weighted_dot_serial(const Eigen::VectorXd& w, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  double s = 0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w[i] * (a[i] * b[i]);
  return s;
}

}  // namespace qcurv::kernels
