#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "landscape/deeplinear.hpp"
#include "landscape/error.hpp"
#include "test_support.hpp"

using namespace landscape;
using testsupport::gaussian;
using testsupport::max_abs;
using testsupport::uniform_int;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

LinearChain random_chain(const std::vector<Index>& dims, std::mt19937_64& rng) {
  std::vector<Matrix> w;
  for (std::size_t j = 1; j < dims.size(); ++j) w.push_back(gaussian(dims[j], dims[j - 1], rng));
  return LinearChain(w);
}

std::vector<Index> random_dims(Index depth, Index max_dim, std::mt19937_64& rng) {
  std::vector<Index> dims;
  for (Index j = 0; j <= depth + 1; ++j) dims.push_back(uniform_int(1, max_dim, rng));
  // Hidden widths at least min(d_x, d_y).
  const Index lo = std::min(dims.front(), dims.back());
  for (Index j = 1; j <= depth; ++j) dims[j] = std::max(dims[j], lo);
  return dims;
}

// Product by a plain left fold over the weight list.
Matrix naive_product(const LinearChain& c) {
  Matrix P = Matrix::Identity(c.d_x(), c.d_x());
  for (const Matrix& W : c.weights()) {
    Matrix next = Matrix::Zero(W.rows(), P.cols());
    for (Index r = 0; r < W.rows(); ++r)
      for (Index s = 0; s < P.cols(); ++s)
        for (Index k = 0; k < W.cols(); ++k) next(r, s) += W(r, k) * P(k, s);
    P = next;
  }
  return P;
}

double naive_loss(const LinearChain& c, const Matrix& X, const Matrix& Y) {
  return 0.5 * (naive_product(c) * X - Y).squaredNorm();
}

// Least-squares minimizer of 0.5||R X - Y||^2 for X of full row rank.
Matrix ls_solution(const Matrix& X, const Matrix& Y) {
  return Y * X.transpose() * (X * X.transpose()).inverse();
}

// Critical chain for any loss: two distinct factors are zero.
LinearChain double_zero_chain(const std::vector<Index>& dims, std::mt19937_64& rng) {
  LinearChain c = random_chain(dims, rng);
  const Index n = c.num_factors();
  const Index a = uniform_int(1, n, rng);
  Index b = uniform_int(1, n - 1, rng);
  if (b >= a) ++b;
  c.set_factor(a, Matrix::Zero(c.factor(a).rows(), c.factor(a).cols()));
  c.set_factor(b, Matrix::Zero(c.factor(b).rows(), c.factor(b).cols()));
  return c;
}

void check_escape(const EscapePair& e, const LinearChain& base, const L0Oracle& o, double eps) {
  const double l = chain_loss(base, o);
  CHECK(e.loss_base == doctest::Approx(l));
  CHECK(chain_loss(e.ascent, o) == e.loss_ascent);
  CHECK(chain_loss(e.descent, o) == e.loss_descent);
  CHECK(e.loss_ascent - l > 1e-12 * o.scale);
  CHECK(l - e.loss_descent > 1e-12 * o.scale);
  CHECK(base.max_factor_distance(e.ascent) <= eps * (1 + 1e-12));
  CHECK(base.max_factor_distance(e.descent) <= eps * (1 + 1e-12));
  CHECK(e.ascent.dims() == base.dims());
  CHECK(e.descent.dims() == base.dims());
}

}  // namespace

TEST_CASE("chain shapes and accessors") {
  std::mt19937_64 rng(61);
  const LinearChain c = random_chain({3, 4, 2, 1}, rng);
  CHECK(c.depth() == 2);
  CHECK(c.num_factors() == 3);
  CHECK(c.dims() == std::vector<Index>{3, 4, 2, 1});
  CHECK(c.d_x() == 3);
  CHECK(c.d_y() == 1);
  CHECK(c.width_condition());
  CHECK_FALSE(LinearChain::zeros({3, 1, 3}).width_condition());
  CHECK(LinearChain::zeros({3, 1, 1}).width_condition());

  CHECK(code_of([] { LinearChain({Matrix::Zero(2, 3), Matrix::Zero(2, 3)}); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([] { LinearChain({Matrix::Zero(2, 3)}); }) == ErrorCode::ShapeMismatch);
  LinearChain m = c;
  CHECK(code_of([&] { m.set_factor(2, Matrix::Zero(3, 3)); }) == ErrorCode::ShapeMismatch);
  CHECK(code_of([&] { (void)m.factor(0); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { (void)m.factor(4); }) == ErrorCode::IndexOutOfRange);

  const LinearChain t = c.transposed();
  CHECK(t.dims() == std::vector<Index>{1, 2, 4, 3});
  CHECK(max_abs(end_to_end(t) - end_to_end(c).transpose()) <= 1e-14);
}

TEST_CASE("chain products") {
  std::mt19937_64 rng(62);
  const LinearChain c = random_chain({2, 3, 4, 2}, rng);
  for (Index j = 1; j <= 4; ++j) {
    const Matrix I = chain_product(c, j - 1, j);
    CHECK(I.rows() == c.dims()[j - 1]);
    CHECK(I.isIdentity(0.0));
  }
  CHECK(max_abs(chain_product(c, 3, 1) - naive_product(c)) <= 1e-12);
  CHECK(max_abs(chain_product(c, 3, 2) - c.factor(3) * c.factor(2)) <= 1e-12);
  CHECK(max_abs(chain_product(c, 2, 2) - c.factor(2)) == 0.0);
  CHECK(code_of([&] { chain_product(c, 1, 3); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { chain_product(c, 4, 1); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { chain_product(c, 2, 0); }) == ErrorCode::IndexOutOfRange);

  const LinearChain id({Matrix::Identity(3, 3), Matrix::Identity(3, 3), Matrix::Identity(3, 3)});
  CHECK(end_to_end(id).isIdentity(0.0));

  for (int k = 0; k < 50; ++k) {
    const LinearChain r = random_chain(random_dims(uniform_int(1, 4, rng), 5, rng), rng);
    CHECK(max_abs(end_to_end(r) - naive_product(r)) <= 1e-12 * (1 + naive_product(r).norm()));
  }
}

TEST_CASE("squared loss oracle") {
  std::mt19937_64 rng(63);
  const Matrix X = gaussian(3, 7, rng), Y = gaussian(2, 7, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  CHECK(o.crit_implies_global);
  CHECK(o.orientation == Orientation::Minimize);
  CHECK(o.scale == doctest::Approx(1 + X.norm() * Y.norm() + X.squaredNorm()));
  const Matrix R = gaussian(2, 3, rng);
  CHECK(o.value(R) == doctest::Approx(0.5 * (R * X - Y).squaredNorm()));
  // Gradient by central differences.
  Matrix fd(2, 3);
  for (Index i = 0; i < R.size(); ++i) {
    Matrix a = R, b = R;
    a.data()[i] += 1e-6;
    b.data()[i] -= 1e-6;
    fd.data()[i] = (o.value(a) - o.value(b)) / 2e-6;
  }
  CHECK(max_abs(o.grad(R) - fd) <= 1e-6 * (1 + fd.norm()));
  CHECK(code_of([&] { o.value(Matrix::Zero(3, 3)); }) == ErrorCode::ShapeMismatch);

  const L0Oracle t = transposed_oracle(o);
  CHECK(t.value(R.transpose()) == o.value(R));
  CHECK(max_abs(t.grad(R.transpose()) - o.grad(R).transpose()) == 0.0);
  CHECK(t.scale == o.scale);
}

TEST_CASE("partial gradients") {
  std::mt19937_64 rng(64);
  const Matrix X = gaussian(2, 5, rng), Y = gaussian(2, 5, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);

  for (const Matrix& g : partial_grads(LinearChain::zeros({2, 3, 3, 2}), o)) CHECK(g.norm() == 0.0);
  CHECK(is_critical(LinearChain::zeros({2, 3, 3, 2}), o));

  const LinearChain id({Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
  const auto grads = partial_grads(id, o);
  REQUIRE(grads.size() == 2);
  for (Index j = 1; j <= 2; ++j) {
    Matrix fd(2, 2);
    for (Index i = 0; i < 4; ++i) {
      LinearChain a = id, b = id;
      Matrix Wa = id.factor(j), Wb = id.factor(j);
      Wa.data()[i] += 1e-6;
      Wb.data()[i] -= 1e-6;
      a.set_factor(j, Wa);
      b.set_factor(j, Wb);
      fd.data()[i] = (naive_loss(a, X, Y) - naive_loss(b, X, Y)) / 2e-6;
    }
    CHECK(max_abs(grads[j - 1] - fd) <= 1e-5 * (1 + fd.norm()));
  }

  const LinearChain opt = embed_product(ls_solution(X, Y), {2, 3, 2});
  CHECK(max_partial_norm(opt, o) <= 1e-10 * o.scale);
  CHECK(is_critical(opt, o));
  CHECK_FALSE(is_critical(random_chain({2, 3, 2}, rng), o));
}

TEST_CASE("property: partial gradients match finite differences") {
  std::mt19937_64 rng(65);
  for (int k = 0; k < 50; ++k) {
    const std::vector<Index> dims = random_dims(uniform_int(1, 3, rng), 4, rng);
    const Matrix X = gaussian(dims.front(), 6, rng), Y = gaussian(dims.back(), 6, rng);
    const L0Oracle o = squared_loss_oracle(X, Y);
    const LinearChain c = random_chain(dims, rng);
    const auto grads = partial_grads(c, o);
    double num = 0.0, den = 0.0;
    for (Index j = 1; j <= c.num_factors(); ++j) {
      for (Index i = 0; i < c.factor(j).size(); ++i) {
        LinearChain a = c, b = c;
        Matrix Wa = c.factor(j), Wb = c.factor(j);
        const double h = 1e-6 * (1 + std::abs(Wa.data()[i]));
        Wa.data()[i] += h;
        Wb.data()[i] -= h;
        a.set_factor(j, Wa);
        b.set_factor(j, Wb);
        const double fd = (naive_loss(a, X, Y) - naive_loss(b, X, Y)) / (2 * h);
        num += std::pow(grads[j - 1].data()[i] - fd, 2);
        den += fd * fd;
      }
    }
    CHECK(std::sqrt(num) <= 1e-5 * std::max(1.0, std::sqrt(den)));
  }
}

TEST_CASE("saddle escape from the zero chain") {
  std::mt19937_64 rng(66);
  const Matrix X = gaussian(2, 5, rng), Y = gaussian(1, 5, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  const LinearChain z = LinearChain::zeros({2, 2, 1});
  const EscapePair e = construct_saddle_perturbations(z, o, 0.1);
  check_escape(e, z, o, 0.1);
  CHECK(e.loss_ascent > e.loss_base);
  CHECK(e.loss_base > e.loss_descent);
  CHECK(naive_loss(e.ascent, X, Y) > naive_loss(z, X, Y));
  CHECK(naive_loss(e.descent, X, Y) < naive_loss(z, X, Y));
  CHECK_FALSE(e.transposed);

  const Classification c = classify_critical(z, o, 0.1);
  CHECK(c.verdict == Verdict::Saddle);
  CHECK(c.grad_norm == doctest::Approx((Y * X.transpose()).norm()));
  REQUIRE(c.escape.has_value());
  check_escape(*c.escape, z, o, 0.1);
  CHECK_FALSE(c.j_star.has_value());
}

TEST_CASE("saddle with a single zero interior factor") {
  std::mt19937_64 rng(67);
  const Matrix X = gaussian(2, 6, rng), Y = gaussian(1, 6, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  // Only W_2 is zero. The W_2 partial is (W_4 W_3)^T G W_1^T with G = -Y X^T,
  // which vanishes once the rows of W_1 are orthogonal to G.
  LinearChain c = random_chain({2, 3, 3, 3, 1}, rng);
  c.set_factor(2, Matrix::Zero(3, 3));
  const Vector g = o.grad(Matrix::Zero(1, 2)).transpose();
  const Matrix P = Matrix::Identity(2, 2) - g * g.transpose() / g.squaredNorm();
  c.set_factor(1, gaussian(3, 2, rng) * P);
  REQUIRE(is_critical(c, o));
  for (Index j : {1, 3, 4}) CHECK(c.factor(j).norm() > 0.0);
  const EscapePair e = construct_saddle_perturbations(c, o, 0.1);
  check_escape(e, c, o, 0.1);
  CHECK(e.construction_case == 2);
  CHECK(e.j_star >= 2);
  CHECK(classify_critical(c, o, 0.1).verdict == Verdict::Saddle);
}

TEST_CASE("property: critical chains with a nonzero end-to-end gradient are saddles") {
  std::mt19937_64 rng(68);
  int by_case[2] = {0, 0};
  int transposed = 0;
  for (int k = 0; k < 60; ++k) {
    const std::vector<Index> dims = random_dims(uniform_int(1, 3, rng), 4, rng);
    const Matrix X = gaussian(dims.front(), 6, rng), Y = gaussian(dims.back(), 6, rng);
    const L0Oracle o = squared_loss_oracle(X, Y);
    const LinearChain c = double_zero_chain(dims, rng);
    REQUIRE(is_critical(c, o));
    const Classification cl = classify_critical(c, o, 0.1);
    CHECK(cl.verdict == Verdict::Saddle);
    REQUIRE(cl.escape.has_value());
    check_escape(*cl.escape, c, o, 0.1);
    ++by_case[cl.escape->construction_case - 1];
    transposed += cl.escape->transposed ? 1 : 0;
  }
  CHECK(by_case[0] + by_case[1] == 60);
  CHECK(transposed > 0);
}

TEST_CASE("d_y larger than d_x goes through the transposed construction") {
  std::mt19937_64 rng(69);
  const Matrix X = gaussian(1, 4, rng), Y = gaussian(3, 4, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  const LinearChain z = LinearChain::zeros({1, 2, 3});
  const EscapePair e = construct_saddle_perturbations(z, o, 0.05);
  CHECK(e.transposed);
  check_escape(e, z, o, 0.05);
  CHECK(e.j_star >= 1);
  CHECK(e.j_star <= z.num_factors());
}

TEST_CASE("saddle construction errors") {
  std::mt19937_64 rng(70);
  const Matrix X = gaussian(2, 5, rng), Y = gaussian(2, 5, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  const LinearChain opt = embed_product(ls_solution(X, Y), {2, 2, 2});
  CHECK(code_of([&] { construct_saddle_perturbations(opt, o, 0.1); }) == ErrorCode::GradientZero);
  CHECK(code_of([&] { construct_saddle_perturbations(random_chain({2, 2, 2}, rng), o, 0.1); }) ==
        ErrorCode::NotCritical);
  CHECK(code_of([&] { construct_saddle_perturbations(LinearChain::zeros({2, 2, 2}), o, 0.0); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { construct_saddle_perturbations(LinearChain::zeros({2, 1, 2}), o, 0.1); }) ==
        ErrorCode::WidthViolation);
}

TEST_CASE("classification verdicts") {
  std::mt19937_64 rng(71);
  const Matrix X = gaussian(3, 8, rng), Y = gaussian(2, 8, rng);
  const L0Oracle o = squared_loss_oracle(X, Y);
  const Matrix R = ls_solution(X, Y);

  const LinearChain opt = embed_product(R, {3, 2, 4, 2});
  const Classification g = classify_critical(opt, o, 0.1);
  CHECK(g.verdict == Verdict::GlobalMin);
  CHECK(g.grad_norm <= 1e-9 * o.scale);
  CHECK_FALSE(g.escape.has_value());

  L0Oracle neg = o;
  neg.value = [o](const Matrix& M) { return -o.value(M); };
  neg.grad = [o](const Matrix& M) { return Matrix(-o.grad(M)); };
  neg.orientation = Orientation::Maximize;
  CHECK(classify_critical(opt, neg, 0.1).verdict == Verdict::GlobalMax);

  // Cubic loss: zero gradient at the origin, which is neither min nor max.
  L0Oracle cubic;
  cubic.value = [](const Matrix& M) { return M.array().cube().sum(); };
  cubic.grad = [](const Matrix& M) { return Matrix(3.0 * M.array().square()); };
  const LinearChain z = LinearChain::zeros({2, 2, 2});
  CHECK(classify_critical(z, cubic, 0.1).verdict == Verdict::Indeterminate);
  CHECK(classify_critical(z, cubic, 0.1, 1e-9, LocalCertification::LocalMin).verdict ==
        Verdict::LocalMinTransfer);
  CHECK(classify_critical(z, cubic, 0.1, 1e-9, LocalCertification::LocalMax).verdict ==
        Verdict::LocalMaxTransfer);

  CHECK(code_of([&] { classify_critical(random_chain({3, 2, 2}, rng), o, 0.1); }) ==
        ErrorCode::NotCritical);
  CHECK(code_of([&] { classify_critical(LinearChain::zeros({3, 1, 2}), o, 0.1); }) ==
        ErrorCode::WidthViolation);
  CHECK(to_string(Verdict::Saddle) == "Saddle");
  CHECK(to_string(Verdict::GlobalMin) == "GlobalMin");
}

TEST_CASE("property: convex oracle never yields Indeterminate") {
  std::mt19937_64 rng(72);
  for (int k = 0; k < 40; ++k) {
    const std::vector<Index> dims = random_dims(uniform_int(1, 3, rng), 4, rng);
    Matrix X = gaussian(dims.front(), 8, rng);
    const Matrix Y = gaussian(dims.back(), 8, rng);
    const L0Oracle o = squared_loss_oracle(X, Y);
    const LinearChain c = (k % 2 == 0) ? double_zero_chain(dims, rng)
                                       : embed_product(ls_solution(X, Y), dims);
    const Verdict v = classify_critical(c, o, 0.1).verdict;
    CHECK((v == Verdict::Saddle || v == Verdict::GlobalMin));
  }
}

TEST_CASE("decompose_near") {
  std::mt19937_64 rng(73);
  const LinearChain c = random_chain({3, 3, 3, 3}, rng);
  const LinearChain same = decompose_near(c, end_to_end(c), 2, 0.1);
  CHECK(same.max_factor_distance(c) == 0.0);

  const LinearChain z = LinearChain::zeros({3, 3, 3, 3});
  CHECK(code_of([&] { decompose_near(z, Matrix::Zero(3, 3), 2, 0.1); }) == ErrorCode::RankDeficient);
  CHECK(code_of([&] { decompose_near(c, end_to_end(c) + Matrix::Constant(3, 3, 100.0), 2, 0.1); }) ==
        ErrorCode::RadiusExceeded);
}

TEST_CASE("property: decompose_near round trip") {
  std::mt19937_64 rng(74);
  int done = 0;
  for (int k = 0; k < 100; ++k) {
    const Index dx = uniform_int(1, 3, rng), dy = uniform_int(1, 3, rng);
    const Index h = uniform_int(1, 3, rng);
    std::vector<Index> dims{dx};
    for (Index j = 0; j < h; ++j) dims.push_back(uniform_int(std::max(dx, dy), 5, rng));
    dims.push_back(dy);
    const LinearChain c = random_chain(dims, rng);
    const Index js = uniform_int(1, c.num_factors(), rng);
    const Matrix A = chain_product(c, c.num_factors(), js + 1);
    const Matrix B = chain_product(c, js - 1, 1);
    if (numeric_rank(A) < A.rows() || numeric_rank(B) < B.cols()) continue;
    const double eps = 0.1;
    const double radius = 0.5 * smallest_singular_value(A) * smallest_singular_value(B) * eps;
    Matrix D = gaussian(c.d_y(), c.d_x(), rng);
    D *= radius / D.norm();
    const Matrix R = end_to_end(c) + D;
    const LinearChain v = decompose_near(c, R, js, eps);
    CHECK(max_abs(naive_product(v) - R) <= 1e-10 * (1 + R.norm()));
    CHECK(v.max_factor_distance(c) <= eps);
    for (Index j = 1; j <= c.num_factors(); ++j)
      if (j != js) CHECK(v.factor(j) == c.factor(j));
    ++done;
  }
  CHECK(done >= 80);
}

TEST_CASE("embed_product") {
  const LinearChain id = embed_product(Matrix::Identity(3, 3), {3, 3, 3, 3});
  for (const Matrix& W : id.weights()) CHECK(W.isIdentity(0.0));

  std::mt19937_64 rng(75);
  for (int k = 0; k < 50; ++k) {
    const Matrix R = gaussian(2, 3, rng);
    CHECK(naive_product(embed_product(R, {3, 2, 2, 2})) == R);
    CHECK(end_to_end(embed_product(R, {3, 4, 2, 5, 2})) == R);
    const Matrix T = gaussian(3, 2, rng);
    CHECK(end_to_end(embed_product(T, {2, 2, 4, 3})) == T);
  }
  CHECK(code_of([] { embed_product(Matrix::Zero(2, 3), {3, 1, 2}); }) == ErrorCode::WidthViolation);
  CHECK(code_of([] { embed_product(Matrix::Zero(2, 3), {3, 2, 3}); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("find_j_star") {
  std::mt19937_64 rng(76);
  const LinearChain full = random_chain({3, 3, 2}, rng);
  REQUIRE(numeric_rank(end_to_end(full)) == 2);
  CHECK(find_j_star(full) == Index{1});
  CHECK_FALSE(find_j_star(LinearChain::zeros({3, 3, 3})).has_value());

  for (int k = 0; k < 30; ++k) {
    const LinearChain c = random_chain({3, 3, 3, 3}, rng);
    const auto js = find_j_star(c);
    REQUIRE(js.has_value());
    const Matrix A = chain_product(c, c.num_factors(), *js + 1);
    const Matrix B = chain_product(c, *js - 1, 1);
    CHECK(numeric_rank(A) == A.rows());
    CHECK(numeric_rank(B) == B.cols());
    for (Index j = 1; j < *js; ++j) {
      const Matrix Aj = chain_product(c, c.num_factors(), j + 1);
      const Matrix Bj = chain_product(c, j - 1, 1);
      CHECK_FALSE((numeric_rank(Aj) == Aj.rows() && numeric_rank(Bj) == Bj.cols()));
    }
  }

  // Zero first factor with full-rank later ones: only j* = 1 can work.
  LinearChain c = random_chain({2, 2, 2}, rng);
  c.set_factor(1, Matrix::Zero(2, 2));
  CHECK(find_j_star(c) == Index{1});
  c.set_factor(2, Matrix::Zero(2, 2));
  CHECK_FALSE(find_j_star(c).has_value());
}
