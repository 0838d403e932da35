#include <doctest.h>

#include <cmath>

#include "sklu/lanczos.hpp"
#include "sklu/model.hpp"
#include "sklu/prng.hpp"
#include "sklu/score.hpp"

using namespace sklu;

namespace {

MlpModel random_model(std::vector<Index> dims, Activation act, std::uint64_t seed) {
  return mlp_init(std::move(dims), act, seed);
}

// Central finite differences of x -> f_{theta + eps v}(x).
Vector jvp_fd(const MlpModel& m, ConstVectorRef x, ConstVectorRef v, double eps) {
  MlpModel plus = m;
  MlpModel minus = m;
  plus.params += eps * v;
  minus.params -= eps * v;
  return (forward(plus, x) - forward(minus, x)) / (2.0 * eps);
}

}  // namespace

TEST_CASE("forward of a zero-weight network returns the last bias") {
  MlpModel m = mlp_init({3, 4, 2}, Activation::Tanh, 1);
  m.params.setZero();
  // last layer bias sits at the very end of the layout
  m.params[m.param_count() - 2] = 0.25;
  m.params[m.param_count() - 1] = -1.5;
  const Vector out = forward(m, Vector::Ones(3));
  CHECK(out[0] == 0.25);
  CHECK(out[1] == -1.5);
}

TEST_CASE("forward of an identity linear layer is the identity") {
  MlpModel m = mlp_init({3, 3}, Activation::Tanh, 2);
  m.params.setZero();
  for (Index i = 0; i < 3; ++i) m.params[i * 3 + i] = 1.0;  // W = I, column-major
  SplitMix64 rng(3);
  const Vector x = gaussian_vector(3, rng);
  CHECK((forward(m, x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forward matches a hand-evaluated 2-3-2 tanh net") {
  MlpModel m = mlp_init({2, 3, 2}, Activation::Tanh, 4);
  // W1 (3x2) column-major, b1 (3), W2 (2x3) column-major, b2 (2)
  m.params << 0.1, -0.2, 0.3,   // W1 col 0
      0.4, 0.5, -0.6,           // W1 col 1
      0.01, 0.02, 0.03,         // b1
      1.0, -1.0,                // W2 col 0
      0.5, 0.25,                // W2 col 1
      -0.75, 0.125,             // W2 col 2
      0.2, -0.3;                // b2
  const double x0 = 0.7, x1 = -1.1;
  const double h0 = std::tanh(0.1 * x0 + 0.4 * x1 + 0.01);
  const double h1 = std::tanh(-0.2 * x0 + 0.5 * x1 + 0.02);
  const double h2 = std::tanh(0.3 * x0 - 0.6 * x1 + 0.03);
  const double y0 = 1.0 * h0 + 0.5 * h1 - 0.75 * h2 + 0.2;
  const double y1 = -1.0 * h0 + 0.25 * h1 + 0.125 * h2 - 0.3;
  Vector x(2);
  x << x0, x1;
  const Vector out = forward(m, x);
  CHECK(std::abs(out[0] - y0) < 1e-12);
  CHECK(std::abs(out[1] - y1) < 1e-12);
}

TEST_CASE("jvp is zero on a zero tangent and linear in the tangent") {
  const MlpModel m = random_model({3, 5, 2}, Activation::Tanh, 5);
  SplitMix64 rng(6);
  const Vector x = gaussian_vector(3, rng);
  CHECK(jvp(m, x, Vector::Zero(m.param_count())).norm() == 0.0);
  const Vector v = gaussian_vector(m.param_count(), rng);
  const Vector w = gaussian_vector(m.param_count(), rng);
  const Vector lhs = jvp(m, x, 2.0 * v - 0.5 * w);
  const Vector rhs = 2.0 * jvp(m, x, v) - 0.5 * jvp(m, x, w);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
}

TEST_CASE("jvp of a linear model applies the weight perturbation directly") {
  MlpModel m = mlp_init({3, 2}, Activation::Tanh, 7);
  SplitMix64 rng(8);
  const Vector x = gaussian_vector(3, rng);
  Vector v = Vector::Zero(m.param_count());
  Matrix dw(2, 3);
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < 2; ++i) {
      dw(i, j) = rng.next_gaussian();
      v[j * 2 + i] = dw(i, j);
    }
  const Vector out = jvp(m, x, v);
  CHECK((out - dw * x).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("jvp matches central finite differences on a 2-4-3 tanh net") {
  const MlpModel m = random_model({2, 4, 3}, Activation::Tanh, 9);
  SplitMix64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector x = gaussian_vector(2, rng);
    const Vector v = unit_sphere_vector(m.param_count(), rng);
    const Vector exact = jvp(m, x, v);
    const Vector approx = jvp_fd(m, x, v, 1e-5);
    CHECK((exact - approx).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("relu jvp matches finite differences away from kinks") {
  const MlpModel m = random_model({3, 6, 2}, Activation::Relu, 11);
  SplitMix64 rng(12);
  int tested = 0;
  for (int trial = 0; trial < 20 && tested < 5; ++trial) {
    const Vector x = gaussian_vector(3, rng);
    // skip probes that put any pre-activation within 1e-4 of a kink
    Vector z = Vector::Zero(6);
    Index off = 0;
    const Eigen::Map<const Matrix> w1(m.params.data(), 6, 3);
    const Eigen::Map<const Vector> b1(m.params.data() + 18, 6);
    z = w1 * x + b1;
    if (z.cwiseAbs().minCoeff() < 1e-4) continue;
    ++tested;
    const Vector v = unit_sphere_vector(m.param_count(), rng);
    const Vector exact = jvp(m, x, v);
    const Vector approx = jvp_fd(m, x, v, 1e-6);
    CHECK((exact - approx).cwiseAbs().maxCoeff() < 1e-5);
    (void)off;
  }
  CHECK(tested >= 3);
}

TEST_CASE("vjp basics and the regression-gradient layout") {
  const MlpModel m = random_model({4, 3}, Activation::Tanh, 13);
  SplitMix64 rng(14);
  const Vector x = gaussian_vector(4, rng);
  CHECK(vjp(m, x, Vector::Zero(3)).norm() == 0.0);

  MlpModel lin = mlp_init({3, 1}, Activation::Tanh, 15);
  const Vector xq = gaussian_vector(3, rng);
  const Vector grad = vjp(lin, xq, Vector::Ones(1));
  for (Index i = 0; i < 3; ++i) CHECK(grad[i] == xq[i]);
  CHECK(grad[3] == 1.0);
}

TEST_CASE("jvp and vjp satisfy the adjoint identity") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const std::vector<std::vector<Index>> grids = {{2, 4, 3}, {3, 8, 8, 2}, {5, 2}};
    for (const auto& dims : grids) {
      const MlpModel m = random_model(dims, seed % 2 ? Activation::Tanh : Activation::Relu,
                                      100 + seed);
      SplitMix64 rng(200 + seed);
      for (int trial = 0; trial < 10; ++trial) {
        const Vector x = gaussian_vector(m.input_dim(), rng);
        const Vector v = gaussian_vector(m.param_count(), rng);
        const Vector u = gaussian_vector(m.output_dim(), rng);
        const double a = u.dot(jvp(m, x, v));
        const double b = vjp(m, x, u).dot(v);
        CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1.0));
      }
    }
  }
}

TEST_CASE("loss_output_hessian for mse and cross-entropy") {
  CHECK((loss_output_hessian(LossKind::Mse, Vector::Zero(3)) - Matrix::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() == 0.0);

  const Matrix h = loss_output_hessian(LossKind::CrossEntropy, Vector::Zero(2));
  CHECK(h(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(h(0, 1) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(h(1, 0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(h(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("cross-entropy Hessian matches finite differences of -log softmax") {
  SplitMix64 rng(16);
  const Vector logits = gaussian_vector(4, rng);
  const Matrix h = loss_output_hessian(LossKind::CrossEntropy, logits);
  // nll(f) = log(sum exp f) - f[y]; Hessian independent of y, use y = 0
  const auto nll = [](const Vector& f) {
    return std::log(f.array().exp().sum()) - f[0];
  };
  const double eps = 1e-5;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) {
      Vector fpp = logits, fpm = logits, fmp = logits, fmm = logits;
      fpp[i] += eps;
      fpp[j] += eps;
      fpm[i] += eps;
      fpm[j] -= eps;
      fmp[i] -= eps;
      fmp[j] += eps;
      fmm[i] -= eps;
      fmm[j] -= eps;
      const double fd = (nll(fpp) - nll(fpm) - nll(fmp) + nll(fmm)) / (4.0 * eps * eps);
      CHECK(std::abs(h(i, j) - fd) < 1e-6);
    }
}

TEST_CASE("scalar GGN of a one-weight linear model") {
  MlpModel m = mlp_init({1, 1}, Activation::Tanh, 17);
  m.params << 0.5, 0.0;  // w, b
  Matrix inputs(1, 2);
  inputs << 2.0, 3.0;
  const GgnOperator g(m, inputs, LossKind::Mse);
  // J(x) = [x, 1] per datum; G = [[13, 5], [5, 2]]
  Vector e_w(2), e_b(2);
  e_w << 1, 0;
  e_b << 0, 1;
  const Vector gw = g(e_w);
  const Vector gb = g(e_b);
  CHECK(gw[0] == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(gw[1] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(gb[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(gb[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g(Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("ggn matvec matches explicit dense assembly for both losses") {
  SplitMix64 rng(18);
  Matrix inputs(2, 10);
  for (Index i = 0; i < 10; ++i) inputs.col(i) = gaussian_vector(2, rng);
  const MlpModel m = random_model({2, 4, 3}, Activation::Tanh, 19);
  const Index p = m.param_count();

  for (LossKind loss : {LossKind::Mse, LossKind::CrossEntropy}) {
    Matrix dense = Matrix::Zero(p, p);
    for (Index i = 0; i < 10; ++i) {
      const Matrix j = jacobian_rows(m, inputs.col(i));
      const Matrix h = loss_output_hessian(loss, forward(m, inputs.col(i)));
      dense += j.transpose() * h * j;
    }
    const GgnOperator g(m, inputs, loss);
    const double scale = dense.cwiseAbs().maxCoeff();
    for (int trial = 0; trial < 10; ++trial) {
      const Vector v = gaussian_vector(p, rng);
      const Vector via_op = g(v);
      const Vector via_dense = dense * v;
      CHECK((via_op - via_dense).cwiseAbs().maxCoeff() <= 1e-9 * scale * v.norm());
    }
  }
}

TEST_CASE("the GGN is positive semidefinite") {
  SplitMix64 rng(20);
  Matrix inputs(3, 8);
  for (Index i = 0; i < 8; ++i) inputs.col(i) = gaussian_vector(3, rng);
  const MlpModel m = random_model({3, 6, 4}, Activation::Tanh, 21);
  const GgnOperator g(m, inputs, LossKind::CrossEntropy);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector v = gaussian_vector(m.param_count(), rng);
    CHECK(v.dot(g(v)) >= -1e-9 * v.squaredNorm());
  }
}

TEST_CASE("GGN rank is bounded by n * t") {
  SplitMix64 rng(22);
  Matrix inputs(4, 5);
  for (Index i = 0; i < 5; ++i) inputs.col(i) = gaussian_vector(4, rng);
  const MlpModel m = random_model({4, 10, 2}, Activation::Tanh, 23);  // p = 72 >> nt = 10
  const GgnOperator g(m, inputs, LossKind::Mse);
  const LanczosResult res = lanczos_hi_memory(g, 20, 24);
  const Vector ritz = tridiag_eigenvalues(res.t);
  Index above = 0;
  for (Index i = 0; i < ritz.size(); ++i)
    if (ritz[i] > 1e-10 * ritz[0]) ++above;
  CHECK(above <= 10);
}

TEST_CASE("ggn_diagonal matches the dense assembly diagonal") {
  SplitMix64 rng(25);
  Matrix inputs(2, 6);
  for (Index i = 0; i < 6; ++i) inputs.col(i) = gaussian_vector(2, rng);
  const MlpModel m = random_model({2, 4, 3}, Activation::Tanh, 26);
  const Index p = m.param_count();
  for (LossKind loss : {LossKind::Mse, LossKind::CrossEntropy}) {
    Matrix dense = Matrix::Zero(p, p);
    for (Index i = 0; i < 6; ++i) {
      const Matrix j = jacobian_rows(m, inputs.col(i));
      const Matrix h = loss_output_hessian(loss, forward(m, inputs.col(i)));
      dense += j.transpose() * h * j;
    }
    const Vector diag = ggn_diagonal(m, inputs, loss);
    CHECK((diag - dense.diagonal()).cwiseAbs().maxCoeff() <= 1e-9 * dense.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("train_sgd with zero epochs leaves parameters untouched") {
  const MlpModel m = random_model({2, 3, 2}, Activation::Tanh, 27);
  Dataset data;
  SplitMix64 rng(28);
  data.inputs = Matrix(2, 12);
  for (Index i = 0; i < 12; ++i) data.inputs.col(i) = gaussian_vector(2, rng);
  data.labels = std::vector<int>(12, 0);
  const TrainResult res = train_sgd(m, data, LossKind::CrossEntropy, 0, 0.1, 4, 29);
  CHECK((res.model.params - m.params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train_sgd solves 1d linear regression") {
  Dataset data;
  SplitMix64 rng(30);
  data.inputs = Matrix(1, 64);
  Matrix targets(1, 64);
  for (Index i = 0; i < 64; ++i) {
    data.inputs(0, i) = rng.next_gaussian();
    targets(0, i) = 2.0 * data.inputs(0, i);
  }
  data.targets = targets;
  const MlpModel m0 = mlp_init({1, 1}, Activation::Tanh, 31);
  const TrainResult res = train_sgd(m0, data, LossKind::Mse, 200, 0.05, 8, 32);
  CHECK(std::abs(res.model.params[0] - 2.0) < 1e-3);
  CHECK(std::abs(res.model.params[1]) < 1e-3);
  CHECK(res.final_loss < 1e-5);
}

TEST_CASE("train_sgd is deterministic and reports divergence") {
  Dataset data;
  SplitMix64 rng(33);
  data.inputs = Matrix(2, 32);
  for (Index i = 0; i < 32; ++i) data.inputs.col(i) = 5.0 * gaussian_vector(2, rng);
  data.labels = std::vector<int>();
  for (Index i = 0; i < 32; ++i) data.labels->push_back(int(i % 2));

  const MlpModel m0 = random_model({2, 4, 2}, Activation::Tanh, 34);
  const TrainResult a = train_sgd(m0, data, LossKind::CrossEntropy, 3, 0.1, 8, 35);
  const TrainResult b = train_sgd(m0, data, LossKind::CrossEntropy, 3, 0.1, 8, 35);
  CHECK((a.model.params - b.model.params).cwiseAbs().maxCoeff() == 0.0);

  Dataset reg = data;
  reg.labels.reset();
  reg.targets = Matrix::Ones(2, 32);
  CHECK_THROWS_AS(train_sgd(m0, reg, LossKind::Mse, 400, 1e6, 8, 36), NonFiniteLoss);
}
