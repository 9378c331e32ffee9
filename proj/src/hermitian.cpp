#include "klab/hermitian.hpp"

#include <cmath>

#include "klab/errors.hpp"

namespace klab {

namespace {

constexpr double kSymTol = 1e-12;

template <class M>
void require_finite(const M& a, const char* what) {
  if (!a.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

double psd_floor(double spectral_norm, double tol) {
  return -std::max(tol, kPsdRelTol * (1.0 + spectral_norm));
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InputError("HermitianMatrix: expected a non-empty square matrix");
  }
  require_finite(entries, "HermitianMatrix");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    throw InputError("HermitianMatrix: not conjugate-symmetric (gap " + std::to_string(asym) + ")");
  }
  a_ = 0.5 * (entries + entries.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int m) {
  return HermitianMatrix(Eigen::MatrixXcd::Identity(m, m));
}

HermitianMatrix HermitianMatrix::diagonal(const Eigen::VectorXd& d) {
  return HermitianMatrix(d.cast<cplx>().asDiagonal().toDenseMatrix());
}

BlockSymmetricMatrix::BlockSymmetricMatrix(const Eigen::MatrixXd& entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw InputError("BlockSymmetricMatrix: expected a non-empty square matrix");
  }
  if (entries.rows() % 2 != 0) throw InputError("BlockSymmetricMatrix: odd dimension");
  require_finite(entries, "BlockSymmetricMatrix");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    throw InputError("BlockSymmetricMatrix: not symmetric (gap " + std::to_string(asym) + ")");
  }
  a_ = 0.5 * (entries + entries.transpose());
}

SpectrumBounds::SpectrumBounds(double lo, double hi) : lambda(lo), Lambda(hi) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw InputError("SpectrumBounds: need 0 < lambda <= Lambda");
  }
}

Eigen::VectorXd eigenvalues(const HermitianMatrix& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A.entries(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return es.eigenvalues();
}

double min_eigenvalue(const HermitianMatrix& A) { return eigenvalues(A)(0); }

double max_eigenvalue(const HermitianMatrix& A) {
  const auto ev = eigenvalues(A);
  return ev(ev.size() - 1);
}

double det(const HermitianMatrix& A) { return A.entries().partialPivLu().determinant().real(); }

bool is_psd(const Eigen::MatrixXd& A, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double norm = std::max(std::fabs(ev(0)), std::fabs(ev(ev.size() - 1)));
  return ev(0) >= psd_floor(norm, tol);
}

bool is_psd(const HermitianMatrix& A, double tol) {
  const auto ev = eigenvalues(A);
  const double norm = std::max(std::fabs(ev(0)), std::fabs(ev(ev.size() - 1)));
  return ev(0) >= psd_floor(norm, tol);
}

InequalityCheck block_det_inequality_check(const BlockSymmetricMatrix& A, double tol) {
  if (!is_psd(A.entries(), tol)) throw InputError("block_det_inequality_check: matrix is indefinite");
  InequalityCheck r;
  r.lhs = A.entries().determinant();
  r.rhs = 1.0;
  for (int i = 0; i < A.m(); ++i) r.rhs *= A.block(i, i).determinant();
  r.holds = r.lhs <= r.rhs + tol * std::max(1.0, std::fabs(r.rhs));
  return r;
}

HermitianMatrix complex_hessian_from_real(const BlockSymmetricMatrix& realHess) {
  const int m = realHess.m();
  const auto& H = realHess.entries();
  Eigen::MatrixXcd c(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      const double xx = H(2 * a, 2 * b), yy = H(2 * a + 1, 2 * b + 1);
      const double xy = H(2 * a, 2 * b + 1), yx = H(2 * a + 1, 2 * b);
      c(a, b) = 0.25 * cplx(xx + yy, xy - yx);
    }
  }
  return HermitianMatrix(c);
}

InequalityCheck hessian_det_bound_check(const BlockSymmetricMatrix& realHess,
                                        const HermitianMatrix& complexHess, double tol) {
  if (complexHess.dim() != realHess.m()) throw InputError("hessian_det_bound_check: dimension mismatch");
  const auto derived = complex_hessian_from_real(realHess);
  const double gap = (derived.entries() - complexHess.entries()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, complexHess.entries().cwiseAbs().maxCoeff());
  if (gap > tol * scale) {
    throw InputError("hessian_det_bound_check: real and complex Hessians disagree (gap " +
                     std::to_string(gap) + ")");
  }
  if (!is_psd(realHess.entries(), tol)) throw InputError("hessian_det_bound_check: real Hessian is not PSD");
  InequalityCheck r;
  r.lhs = realHess.entries().determinant();
  const double d = std::fabs(det(complexHess));
  r.rhs = std::pow(8.0, realHess.m()) * d * d;
  r.holds = r.lhs <= r.rhs + tol;
  return r;
}

}  // namespace klab
