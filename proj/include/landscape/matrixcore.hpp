#pragma once

#include <Eigen/Dense>
#include <optional>

namespace landscape {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Columns of X are data points; Y holds the matching labels column by column.
struct Dataset {
  Matrix X;  // d_x x m
  Matrix Y;  // d_y x m

  // Validates shapes (same column count, m >= 1, non-empty rows) and finiteness.
  static Dataset make(Matrix X, Matrix Y);

  Index m() const { return X.cols(); }
  Index d_x() const { return X.rows(); }
  Index d_y() const { return Y.rows(); }
};

struct LeastSquaresFit {
  Matrix W;      // d_y x (d_x+1), minimum-norm minimizer
  Matrix Y_hat;  // W * augment(X)
  double loss0 = 0.0;
};

// Appends a row of ones.
Matrix augment(const Matrix& X);

LeastSquaresFit least_squares(const Dataset& data);

// loss0 <= tol * (1 + ||Y||_F^2).
bool is_linearly_fittable(const Dataset& data, double tol = 1e-10);

// Default relative rank tolerance: max(rows, cols) * eps * 64.
// A singular value counts when it exceeds rel_tol * sigma_max.
double default_rank_tol(const Matrix& A);

Index numeric_rank(const Matrix& A, std::optional<double> rel_tol = std::nullopt);

// Orthonormal bases; zero-width when the space is trivial.
Matrix null_space_basis(const Matrix& A, std::optional<double> rel_tol = std::nullopt);
Matrix left_null_space_basis(const Matrix& A, std::optional<double> rel_tol = std::nullopt);

// Orthonormal basis of span(big) intersected with the orthogonal complement of
// span(small). Both arguments have orthonormal columns.
Matrix complement_within(const Matrix& big, const Matrix& small);

struct SingularTriplet {
  Vector u;
  double sigma = 0.0;
  Vector v;
};

// Leading singular pair; throws ZeroMatrix when ||A||_F = 0.
SingularTriplet top_singular_vectors(const Matrix& A);

// Smallest of the min(rows, cols) singular values.
double smallest_singular_value(const Matrix& A);

bool all_finite(const Matrix& A);

}  // namespace landscape
