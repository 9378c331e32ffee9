#pragma once
// Small dense Hermitian / real-symmetric linear algebra.
//
// Real coordinates on C^m are ordered (x_1, y_1, x_2, y_2, ...), so the 2x2
// diagonal block A_ii of a real 2m x 2m matrix acts on (x_i, y_i).

#include <Eigen/Dense>
#include <complex>

namespace klab {

using cplx = std::complex<double>;

// Symmetry and PSD checks accept min eigenvalue >= -kPsdRelTol * (1 + ||A||).
inline constexpr double kPsdRelTol = 1e-10;

class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  // Validates conjugate symmetry (relative 1e-12) and finiteness, then
  // stores the exactly Hermitian part.
  explicit HermitianMatrix(const Eigen::MatrixXcd& entries);

  static HermitianMatrix identity(int m);
  static HermitianMatrix diagonal(const Eigen::VectorXd& d);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXcd& entries() const { return a_; }
  cplx operator()(int i, int j) const { return a_(i, j); }

 private:
  Eigen::MatrixXcd a_;
};

class BlockSymmetricMatrix {
 public:
  BlockSymmetricMatrix() = default;
  // Rejects odd or non-square input and asymmetry beyond relative 1e-12.
  explicit BlockSymmetricMatrix(const Eigen::MatrixXd& entries);

  int m() const { return static_cast<int>(a_.rows() / 2); }
  const Eigen::MatrixXd& entries() const { return a_; }
  Eigen::Matrix2d block(int i, int j) const { return a_.block<2, 2>(2 * i, 2 * j); }

 private:
  Eigen::MatrixXd a_;
};

struct SpectrumBounds {
  double lambda = 1.0;
  double Lambda = 1.0;
  SpectrumBounds() = default;
  SpectrumBounds(double lo, double hi);  // throws unless 0 < lo <= hi
};

struct InequalityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// det(A) <= prod_i det(A_ii). Requires A PSD up to -tol on eigenvalues.
InequalityCheck block_det_inequality_check(const BlockSymmetricMatrix& A, double tol);

// det(D^2 f) <= 8^m |det(f_{a b-bar})|^2 at a minimum-type point.
InequalityCheck hessian_det_bound_check(const BlockSymmetricMatrix& realHess,
                                        const HermitianMatrix& complexHess, double tol);

// f_{a b-bar} = 1/4 [(f_{xa xb} + f_{ya yb}) + i (f_{xa yb} - f_{ya xb})]
HermitianMatrix complex_hessian_from_real(const BlockSymmetricMatrix& realHess);

double min_eigenvalue(const HermitianMatrix& A);
double max_eigenvalue(const HermitianMatrix& A);
Eigen::VectorXd eigenvalues(const HermitianMatrix& A);  // ascending

// Determinant of a Hermitian matrix (real up to rounding).
double det(const HermitianMatrix& A);

bool is_psd(const Eigen::MatrixXd& A, double tol = 0.0);
bool is_psd(const HermitianMatrix& A, double tol = 0.0);

}  // namespace klab
