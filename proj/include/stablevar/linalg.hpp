#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "stablevar/errors.hpp"

namespace stablevar {

// Eigenvalues in descending order with matching orthonormal eigenvectors in
// the columns of `vectors`.
struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Smallest and largest eigenvalue of a symmetric matrix that passed the
// positive-definiteness floor.
struct SpdCheck {
  double min_eigenvalue;
  double max_eigenvalue;
};

// Eigenvalues of a general square matrix, sorted by descending modulus with
// ties broken by descending real part, then descending imaginary part.
using PoleSet = std::vector<std::complex<double>>;

enum class DlyapMethod { automatic, vectorized, doubling };
enum class SylvesterMethod { automatic, vectorized, schur };

namespace detail {

constexpr double kSpdFloor = 1e-12;        // relative eigenvalue floor
constexpr double kSymmetryTol = 1e-8;      // relative symmetry tolerance

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entries");
  }
}

inline void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(what) + ": expected a non-empty square matrix, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

inline void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double gap = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (gap > kSymmetryTol * scale) {
    throw InvalidInput(std::string(what) + ": matrix is not symmetric (max asymmetry " +
                       std::to_string(gap) + ")");
  }
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Flips each eigenvector so its largest-magnitude entry (first such entry on
// ties) is positive, then makes the order of equal eigenvalues reproducible
// by sorting their vectors lexicographically.
inline void canonicalize_eigenvectors(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const Eigen::Index n = vectors.rows();
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index lead = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&lead);
    if (vectors(lead, k) < 0.0) {
      vectors.col(k) = -vectors.col(k);
    }
  }
  auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (vectors(i, a) != vectors(i, b)) return vectors(i, a) < vectors(i, b);
    }
    return false;
  };
  Eigen::Index start = 0;
  while (start < values.size()) {
    Eigen::Index stop = start + 1;
    while (stop < values.size() && values(stop) == values(start)) ++stop;
    for (Eigen::Index i = start; i + 1 < stop; ++i) {  // tiny groups: selection sort
      for (Eigen::Index j = i + 1; j < stop; ++j) {
        if (lex_less(i, j)) vectors.col(i).swap(vectors.col(j));
      }
    }
    start = stop;
  }
}

}  // namespace detail

// Symmetric eigendecomposition with a deterministic ordering and sign
// convention.  The input is symmetrized before factoring; asymmetry beyond
// tolerance is rejected.
inline SymEig sym_eig(const Eigen::MatrixXd& s) {
  detail::require_square(s, "sym_eig");
  detail::require_finite(s, "sym_eig");
  detail::require_symmetric(s, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(detail::symmetrize(s));
  if (solver.info() != Eigen::Success) {
    throw Error("sym_eig: eigendecomposition failed to converge");
  }
  const Eigen::Index n = s.rows();
  SymEig out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  detail::canonicalize_eigenvectors(out.values, out.vectors);
  return out;
}

// Verifies S is symmetric positive definite with smallest eigenvalue above
// the relative floor, returning the extreme eigenvalues.
inline SpdCheck require_spd(const Eigen::MatrixXd& s, const char* what) {
  detail::require_square(s, what);
  detail::require_finite(s, what);
  detail::require_symmetric(s, what);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(detail::symmetrize(s),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(std::string(what) + ": eigendecomposition failed to converge");
  }
  const double min_eig = solver.eigenvalues().minCoeff();
  const double max_eig = solver.eigenvalues().maxCoeff();
  if (!(max_eig > 0.0) || !(min_eig > detail::kSpdFloor * max_eig)) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite",
                              min_eig);
  }
  return SpdCheck{min_eig, max_eig};
}

namespace detail {

inline Eigen::MatrixXd spd_power(const Eigen::MatrixXd& s, double exponent, const char* what) {
  require_square(s, what);
  require_finite(s, what);
  require_symmetric(s, what);
  const SymEig eig = sym_eig(s);
  const double max_eig = eig.values(0);
  const double min_eig = eig.values(eig.values.size() - 1);
  if (!(max_eig > 0.0) || !(min_eig > kSpdFloor * max_eig)) {
    throw NotPositiveDefinite(std::string(what) + ": matrix is not positive definite",
                              min_eig);
  }
  const Eigen::VectorXd powered =
      eig.values.array().pow(exponent).matrix();
  return symmetrize(eig.vectors * powered.asDiagonal() * eig.vectors.transpose());
}

}  // namespace detail

// Symmetric positive definite square root S^{1/2}.
inline Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s) {
  return detail::spd_power(s, 0.5, "spd_sqrt");
}

// Symmetric positive definite inverse square root S^{-1/2}.
inline Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& s) {
  return detail::spd_power(s, -0.5, "spd_inv_sqrt");
}

// Lower-triangular Cholesky factor L with L L' = S.
inline Eigen::MatrixXd cholesky(const Eigen::MatrixXd& s) {
  const SpdCheck check = require_spd(s, "cholesky");
  Eigen::LLT<Eigen::MatrixXd> llt(detail::symmetrize(s));
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: factorization failed", check.min_eigenvalue);
  }
  return llt.matrixL();
}

// Largest eigenvalue modulus of a general square matrix.
inline double spectral_radius(const Eigen::MatrixXd& a) {
  detail::require_square(a, "spectral_radius");
  detail::require_finite(a, "spectral_radius");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error("spectral_radius: eigenvalue computation failed to converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// All eigenvalues of a general square matrix in a deterministic order.
inline PoleSet eig_general(const Eigen::MatrixXd& a) {
  detail::require_square(a, "eig_general");
  detail::require_finite(a, "eig_general");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error("eig_general: eigenvalue computation failed to converge");
  }
  PoleSet poles(solver.eigenvalues().data(),
                solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(poles.begin(), poles.end(), [](const auto& x, const auto& y) {
    const double ax = std::abs(x);
    const double ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return poles;
}

namespace detail {

inline Eigen::MatrixXd dlyap_vectorized(const Eigen::MatrixXd& f, const Eigen::MatrixXd& q) {
  const Eigen::Index n = f.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      m.block(i * n, j * n, n, n) -= f(i, j) * f;
    }
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(rhs);
  Eigen::MatrixXd pi = Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
  return symmetrize(pi);
}

inline Eigen::MatrixXd dlyap_doubling(const Eigen::MatrixXd& f, const Eigen::MatrixXd& q) {
  Eigen::MatrixXd x = q;
  Eigen::MatrixXd a = f;
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::MatrixXd delta = a * x * a.transpose();
    x += delta;
    if (!x.allFinite()) {
      throw Error("solve_dlyap: doubling iteration overflowed");
    }
    if (delta.norm() <= 1e-16 * x.norm()) {
      return symmetrize(x);
    }
    a = a * a;
  }
  throw Error("solve_dlyap: doubling iteration did not converge");
}

}  // namespace detail

// Solves the discrete Lyapunov equation X = F X F' + Q for the stationary
// covariance X.  F must be stable; Q must be symmetric (PSD is not enforced,
// so the same routine serves sign-indefinite right-hand sides in tests).
inline Eigen::MatrixXd solve_dlyap(const Eigen::MatrixXd& f, const Eigen::MatrixXd& q,
                                   DlyapMethod method = DlyapMethod::automatic) {
  detail::require_square(f, "solve_dlyap");
  detail::require_finite(f, "solve_dlyap");
  detail::require_square(q, "solve_dlyap");
  detail::require_finite(q, "solve_dlyap");
  if (f.rows() != q.rows()) {
    throw InvalidInput("solve_dlyap: F and Q must have matching dimensions");
  }
  detail::require_symmetric(q, "solve_dlyap");
  const double rho = spectral_radius(f);
  if (!(rho < 1.0)) {
    throw UnstableMatrix("solve_dlyap: transition matrix is not stable", rho);
  }
  const Eigen::MatrixXd q_sym = detail::symmetrize(q);
  if (method == DlyapMethod::vectorized ||
      (method == DlyapMethod::automatic && f.rows() <= 24)) {
    return detail::dlyap_vectorized(f, q_sym);
  }
  return detail::dlyap_doubling(f, q_sym);
}

namespace detail {

inline Eigen::MatrixXd sylvester_vectorized(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                            const Eigen::MatrixXd& c) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.block(j * n, j * n, n, n) = a;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      m.block(i * n, j * n, n, n).diagonal().array() += b(j, i);
    }
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(c.data(), n * n);
  Eigen::VectorXd x = Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(rhs);
  return Eigen::Map<Eigen::MatrixXd>(x.data(), n, n);
}

inline Eigen::MatrixXd sylvester_schur(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       const Eigen::MatrixXd& c) {
  using Cplx = std::complex<double>;
  using MatrixXcd = Eigen::MatrixXcd;
  const Eigen::Index n = a.rows();
  Eigen::ComplexSchur<MatrixXcd> schur_a(a.cast<Cplx>());
  Eigen::ComplexSchur<MatrixXcd> schur_b(b.cast<Cplx>());
  if (schur_a.info() != Eigen::Success || schur_b.info() != Eigen::Success) {
    throw Error("solve_sylvester: Schur decomposition failed to converge");
  }
  const MatrixXcd& ta = schur_a.matrixT();
  const MatrixXcd& ua = schur_a.matrixU();
  const MatrixXcd& tb = schur_b.matrixT();
  const MatrixXcd& ub = schur_b.matrixU();
  const MatrixXcd ct = ua.adjoint() * c.cast<Cplx>() * ub;
  MatrixXcd y(n, n);
  MatrixXcd shifted(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd rhs = ct.col(k);
    if (k > 0) {
      rhs.noalias() -= y.leftCols(k) * tb.col(k).head(k);
    }
    shifted = ta;
    shifted.diagonal().array() += tb(k, k);
    y.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (ua * y * ub.adjoint()).real();
}

}  // namespace detail

// Solves the Sylvester equation A X + X B = C for square same-size blocks.
// Solvability requires the spectra of A and -B to be disjoint; violations
// surface as SingularSystem via the residual check.
inline Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       const Eigen::MatrixXd& c,
                                       SylvesterMethod method = SylvesterMethod::automatic) {
  detail::require_square(a, "solve_sylvester");
  detail::require_finite(a, "solve_sylvester");
  detail::require_square(b, "solve_sylvester");
  detail::require_finite(b, "solve_sylvester");
  detail::require_square(c, "solve_sylvester");
  detail::require_finite(c, "solve_sylvester");
  if (a.rows() != b.rows() || a.rows() != c.rows()) {
    throw InvalidInput("solve_sylvester: A, B, C must have matching dimensions");
  }
  Eigen::MatrixXd x;
  if (method == SylvesterMethod::vectorized ||
      (method == SylvesterMethod::automatic && a.rows() <= 64)) {
    x = detail::sylvester_vectorized(a, b, c);
  } else {
    x = detail::sylvester_schur(a, b, c);
  }
  const double residual = (a * x + x * b - c).norm();
  const double tolerance = 1e-9 * (a.norm() + b.norm()) * x.norm() +
                           std::numeric_limits<double>::min();
  if (!x.allFinite() || residual > tolerance) {
    throw SingularSystem("solve_sylvester: no reliable solution (spectra of A and -B overlap)");
  }
  return x;
}

}  // namespace stablevar
