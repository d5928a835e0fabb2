#pragma once

// Thin wrappers over the LAPACK divide-and-conquer symmetric/Hermitian
// eigensolvers (?syevd / ?heevd). Eigenvalues come back ascending and the
// input matrix is overwritten by the orthonormal eigenvectors.

#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>

#include <string>

#include "jtmodel/errors.hpp"

namespace jt::lapack {

inline void eigh_in_place(Eigen::MatrixXd& a, Eigen::VectorXd& w) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  if (n == 0) return;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
}

inline void eigh_in_place(Eigen::MatrixXcd& a, Eigen::VectorXd& w) {
  const auto n = static_cast<lapack_int>(a.rows());
  w.resize(n);
  if (n == 0) return;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericalError("zheevd failed with info = " + std::to_string(info));
}

}  // namespace jt::lapack
