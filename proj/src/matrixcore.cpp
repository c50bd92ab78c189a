#include "landscape/matrixcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "landscape/error.hpp"

namespace landscape {

namespace {

Eigen::BDCSVD<Matrix> full_svd(const Matrix& A) {
  return Eigen::BDCSVD<Matrix>(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
}

Index rank_from(const Vector& sv, double rel_tol) {
  if (sv.size() == 0) return 0;
  const double smax = sv(0);
  if (!(smax > 0.0)) return 0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * smax) ++r;
  return r;
}

}  // namespace

bool all_finite(const Matrix& A) { return A.allFinite(); }

Dataset Dataset::make(Matrix X, Matrix Y) {
  if (X.cols() < 1 || X.rows() < 1 || Y.rows() < 1)
    throw Error(ErrorCode::ShapeMismatch, "dataset needs m >= 1, d_x >= 1, d_y >= 1");
  if (X.cols() != Y.cols())
    throw Error(ErrorCode::ShapeMismatch,
                "X has " + std::to_string(X.cols()) + " columns but Y has " +
                    std::to_string(Y.cols()));
  if (!X.allFinite() || !Y.allFinite())
    throw Error(ErrorCode::NonFinite, "dataset contains non-finite entries");
  return Dataset{std::move(X), std::move(Y)};
}

Matrix augment(const Matrix& X) {
  Matrix out(X.rows() + 1, X.cols());
  out.topRows(X.rows()) = X;
  out.row(X.rows()).setOnes();
  return out;
}

LeastSquaresFit least_squares(const Dataset& data) {
  const Matrix Xa = augment(data.X);
  // Row form R * Xa ~ Y is solved as Xa^T * R^T ~ Y^T.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  const Matrix At = Xa.transpose();
  cod.setThreshold(default_rank_tol(At));
  cod.compute(At);
  LeastSquaresFit fit;
  fit.W = cod.solve(data.Y.transpose()).transpose();
  fit.Y_hat = fit.W * Xa;
  fit.loss0 = 0.5 * (fit.Y_hat - data.Y).squaredNorm();
  return fit;
}

bool is_linearly_fittable(const Dataset& data, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  const LeastSquaresFit fit = least_squares(data);
  return fit.loss0 <= tol * (1.0 + data.Y.squaredNorm());
}

double default_rank_tol(const Matrix& A) {
  return static_cast<double>(std::max(A.rows(), A.cols())) *
         std::numeric_limits<double>::epsilon() * 64.0;
}

Index numeric_rank(const Matrix& A, std::optional<double> rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(A);
  return rank_from(svd.singularValues(), rel_tol.value_or(default_rank_tol(A)));
}

Matrix null_space_basis(const Matrix& A, std::optional<double> rel_tol) {
  if (A.rows() == 0) return Matrix::Identity(A.cols(), A.cols());
  if (A.cols() == 0) return Matrix(0, 0);
  const auto svd = full_svd(A);
  const Index r = rank_from(svd.singularValues(), rel_tol.value_or(default_rank_tol(A)));
  return svd.matrixV().rightCols(A.cols() - r);
}

Matrix left_null_space_basis(const Matrix& A, std::optional<double> rel_tol) {
  return null_space_basis(A.transpose(), rel_tol);
}

Matrix complement_within(const Matrix& big, const Matrix& small) {
  const Index n = big.rows();
  if (big.cols() == 0) return Matrix(n, 0);
  Matrix projected = big;
  if (small.cols() > 0) projected -= small * (small.transpose() * big);
  // Orthonormalize the projected columns; anything left is outside span(small).
  Eigen::BDCSVD<Matrix> svd(projected, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  Index r = 0;
  const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++r;
  return svd.matrixU().leftCols(r);
}

SingularTriplet top_singular_vectors(const Matrix& A) {
  if (A.size() == 0 || A.norm() == 0.0)
    throw Error(ErrorCode::ZeroMatrix, "top_singular_vectors of a zero matrix");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SingularTriplet t;
  t.u = svd.matrixU().col(0);
  t.sigma = svd.singularValues()(0);
  t.v = svd.matrixV().col(0);
  return t;
}

double smallest_singular_value(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(A);
  const Vector& sv = svd.singularValues();
  return sv(sv.size() - 1);
}

}  // namespace landscape
