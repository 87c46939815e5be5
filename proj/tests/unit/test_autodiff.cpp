#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "gradcheck.hpp"
#include "kgrl/autodiff/init.hpp"
#include "kgrl/autodiff/ops.hpp"
#include "kgrl/autodiff/optim.hpp"

using namespace kgrl::autodiff;
using kgrl::testing::max_gradient_error;
using kgrl::testing::random_values;

namespace {

Tensor<double> param(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  const std::size_t n = numel(shape);
  return Tensor<double>::parameter(std::move(shape), random_values(n, rng, scale));
}

// Direct nested-loop convolution.
std::vector<double> naive_conv(const std::vector<double>& in, std::size_t h, std::size_t w,
                               std::size_t cin, const std::vector<double>& kernel, std::size_t k,
                               std::size_t cout, const std::vector<double>& bias, std::size_t s) {
  const std::size_t oh = (h - k) / s + 1, ow = (w - k) / s + 1;
  std::vector<double> out(oh * ow * cout);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      for (std::size_t co = 0; co < cout; ++co) {
        double acc = bias[co];
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx)
            for (std::size_t ci = 0; ci < cin; ++ci)
              acc += in[((y * s + ky) * w + (x * s + kx)) * cin + ci] *
                     kernel[((ky * k + kx) * cin + ci) * cout + co];
        out[(y * ow + x) * cout + co] = acc;
      }
  return out;
}

// max |G - gain^2 I| with G the Gram matrix of the columns (rows >= cols)
// or of the rows (rows < cols).
double gram_defect(const std::vector<double>& m, std::size_t r, std::size_t c, double gain) {
  const bool by_cols = r >= c;
  const std::size_t n = by_cols ? c : r, len = by_cols ? r : c;
  auto at = [&](std::size_t vec, std::size_t k) { return by_cols ? m[k * c + vec] : m[vec * c + k]; };
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += at(i, k) * at(j, k);
      worst = std::max(worst, std::fabs(dot - (i == j ? gain * gain : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("conv2d matches a nested-loop convolution") {
  std::mt19937_64 rng(3);
  for (auto [h, k, s, cin, cout] : {std::tuple{9, 3, 2, 2, 3}, std::tuple{12, 5, 3, 3, 4},
                                    std::tuple{7, 1, 1, 1, 2}, std::tuple{16, 3, 4, 3, 5}}) {
    auto in = param({std::size_t(h), std::size_t(h), std::size_t(cin)}, rng);
    auto ker = param({std::size_t(k), std::size_t(k), std::size_t(cin), std::size_t(cout)}, rng);
    auto b = param({std::size_t(cout)}, rng);
    auto out = conv2d(in, ker, b, s);
    const auto ref = naive_conv({in.values().begin(), in.values().end()}, h, h, cin,
                                {ker.values().begin(), ker.values().end()}, k, cout,
                                {b.values().begin(), b.values().end()}, s);
    REQUIRE(out.size() == ref.size());
    CHECK(out.shape() == Shape{(std::size_t(h) - k) / s + 1, (std::size_t(h) - k) / s + 1, std::size_t(cout)});
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d rejects kernels larger than the input") {
  auto in = Tensor<double>::zeros({4, 4, 1});
  auto ker = Tensor<double>::zeros({5, 5, 1, 1});
  auto b = Tensor<double>::zeros({1});
  CHECK_THROWS_AS(conv2d(in, ker, b, 1), ShapeError);
  CHECK_THROWS_AS(conv_output_extent(3, 4, 1), ShapeError);
  CHECK(conv_output_extent(64, 3, 4) == 16);
  CHECK(conv_output_extent(16, 5, 2) == 6);
}

TEST_CASE("op gradients match central differences") {
  std::mt19937_64 rng(11);
  SUBCASE("conv2d") {
    auto in = param({7, 7, 2}, rng), ker = param({3, 3, 2, 3}, rng), b = param({3}, rng);
    auto w = Tensor<double>::constant({27}, random_values(27, rng));
    CHECK(max_gradient_error({in, ker, b}, [&] { return sum(mul(reshape(conv2d(in, ker, b, 2), {27}), w)); }) < 1e-6);
  }
  SUBCASE("fully_connected and relu") {
    auto x = param({2, 3}, rng), w = param({6, 4}, rng), b = param({4}, rng, 0.1);
    auto v = Tensor<double>::constant({4}, random_values(4, rng));
    CHECK(max_gradient_error({x, w, b}, [&] { return sum(mul(relu(fully_connected(x, w, b)), v)); }) < 1e-6);
  }
  SUBCASE("softmax and log_softmax") {
    auto z = param({7}, rng, 2.0);
    auto v = Tensor<double>::constant({7}, random_values(7, rng));
    CHECK(max_gradient_error({z}, [&] { return sum(mul(softmax(z), v)); }) < 1e-6);
    CHECK(max_gradient_error({z}, [&] { return sum(mul(log_softmax(z), v)); }) < 1e-6);
  }
  SUBCASE("lstm_cell") {
    const std::size_t d = 5, hd = 4;
    auto x = param({d}, rng), h = param({hd}, rng), c = param({hd}, rng);
    LstmWeights<double> lw{param({d, 4 * hd}, rng, 0.5), param({hd, 4 * hd}, rng, 0.5),
                           param({4 * hd}, rng, 0.5)};
    auto vh = Tensor<double>::constant({hd}, random_values(hd, rng));
    auto vc = Tensor<double>::constant({hd}, random_values(hd, rng));
    auto loss = [&] {
      auto s = lstm_cell(x, h, c, lw);
      return add(sum(mul(s.h, vh)), sum(mul(s.c, vc)));
    };
    CHECK(max_gradient_error({x, h, c, lw.w_input, lw.w_hidden, lw.bias}, loss) < 1e-6);
  }
  SUBCASE("concat, slice, scale, select, mul with aliasing") {
    auto a = param({3}, rng), b = param({4}, rng);
    auto loss = [&] {
      auto cat = concat(a, b);
      auto s = slice(cat, 2, 4);
      return add(sum(mul(s, s)), add(scale(select(cat, 6), 3.0), sum(mul(a, a))));
    };
    CHECK(max_gradient_error({a, b}, loss) < 1e-6);
  }
  SUBCASE("weighted_sum and half_squared_error") {
    std::vector<Tensor<double>> terms{param({1}, rng), param({1}, rng), param({1}, rng)};
    const std::vector<double> weights{0.5, -2.0, 1.5}, targets{1.0, -0.3, 0.2};
    auto loss = [&] {
      return add(weighted_sum<double>(terms, weights), half_squared_error<double>(terms, targets));
    };
    CHECK(max_gradient_error(terms, loss) < 1e-6);
  }
}

TEST_CASE("lstm_cell forward matches the gate equations") {
  std::mt19937_64 rng(5);
  const std::size_t d = 3, hd = 2;
  auto x = param({d}, rng), h = param({hd}, rng), c = param({hd}, rng);
  LstmWeights<double> lw{param({d, 4 * hd}, rng), param({hd, 4 * hd}, rng), param({4 * hd}, rng)};
  auto s = lstm_cell(x, h, c, lw);
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t j = 0; j < hd; ++j) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t col = g * hd + j;
      z[g] = lw.bias[col];
      for (std::size_t i = 0; i < d; ++i) z[g] += x[i] * lw.w_input[i * 4 * hd + col];
      for (std::size_t i = 0; i < hd; ++i) z[g] += h[i] * lw.w_hidden[i * 4 * hd + col];
    }
    const double cn = sig(z[1]) * c[j] + sig(z[0]) * std::tanh(z[2]);
    CHECK(s.c[j] == doctest::Approx(cn).epsilon(1e-12));
    CHECK(s.h[j] == doctest::Approx(sig(z[3]) * std::tanh(cn)).epsilon(1e-12));
  }
}

TEST_CASE("softmax is normalized and log_softmax is its log") {
  auto z = Tensor<double>::constant({4}, {1000.0, 999.0, -5.0, 0.0});
  auto p = softmax(z);
  auto lp = log_softmax(z);
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    total += p[i];
    CHECK(std::isfinite(lp[i]));
    if (p[i] > 0.0) CHECK(std::log(p[i]) == doctest::Approx(lp[i]).epsilon(1e-12));
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("relu subgradient at zero is zero") {
  auto x = Tensor<double>::parameter({3}, {-1.0, 0.0, 2.0});
  backward(sum(relu(x)));
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[2] == 1.0);
}

TEST_CASE("leaf gradients accumulate until zeroed") {
  auto x = Tensor<double>::parameter({2}, {1.0, 2.0});
  auto loss = sum(mul(x, x));
  backward(loss);
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(4.0));
  CHECK(x.grad()[1] == doctest::Approx(8.0));
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("tensor misuse is reported") {
  auto x = Tensor<double>::parameter({2}, {1.0, 2.0});
  CHECK_THROWS_AS(backward(scale(x, 2.0)), ShapeError);
  auto y = add(x, x);
  CHECK_THROWS_AS(y.mutable_values(), std::logic_error);
  CHECK_THROWS_AS(Tensor<double>::constant({3}, {1.0}), ShapeError);
  CHECK_THROWS_AS(Tensor<double>::constant({0}, {}), ShapeError);
  auto c = Tensor<double>::constant({2}, {1.0, 2.0});
  CHECK(c.grad().empty());
  CHECK_FALSE(add(c, c).requires_grad());
  CHECK_FALSE(x.detach().requires_grad());
}

TEST_CASE("rmsprop step follows the update rule") {
  std::vector<double> p{1.0, -2.0}, v{0.5, 0.0};
  const std::vector<double> g{0.3, -4.0};
  RmsPropOptions o{0.01, 0.9, 1e-8};
  rmsprop_step<double>(p, g, v, o);
  const double v0 = 0.9 * 0.5 + 0.1 * 0.09, v1 = 0.1 * 16.0;
  CHECK(v[0] == doctest::Approx(v0).epsilon(1e-15));
  CHECK(v[1] == doctest::Approx(v1).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(1.0 - 0.01 * 0.3 / std::sqrt(v0 + 1e-8)).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.01 * 4.0 / std::sqrt(v1 + 1e-8)).epsilon(1e-15));
  CHECK_THROWS_AS(RmsProp<double>({2}, RmsPropOptions{1e-4, 1.0, 1e-8}), std::invalid_argument);
  CHECK_THROWS_AS(RmsProp<double>({2}, RmsPropOptions{0.0, 0.9, 1e-8}), std::invalid_argument);
}

TEST_CASE("global norm clipping") {
  std::vector<double> a{3.0, 0.0}, b{4.0};
  std::vector<std::span<double>> blocks{a, b};
  CHECK(clip_global_norm<double>(blocks, 10.0) == doctest::Approx(5.0));
  CHECK(a[0] == 3.0);
  CHECK(clip_global_norm<double>(blocks, 1.0) == doctest::Approx(5.0));
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(b[0] == doctest::Approx(0.8));
}

TEST_CASE("orthogonal init gives orthonormal columns or rows") {
  std::mt19937_64 rng(1);
  for (auto [r, c] : {std::pair{27, 32}, std::pair{800, 32}, std::pair{128, 512}, std::pair{64, 7}}) {
    const auto m = orthogonal_init<double>(r, c, 1.0, rng);
    CHECK(m.size() == std::size_t(r * c));
    CHECK(gram_defect(m, r, c, 1.0) < 1e-12);
    CHECK(orthogonality_defect<double>(m, r, c, 1.0) < 1e-12);
    const auto scaled = orthogonal_init<double>(r, c, std::sqrt(2.0), rng);
    CHECK(gram_defect(scaled, r, c, std::sqrt(2.0)) < 1e-12);
  }
  std::mt19937_64 a(9), b(9);
  CHECK(orthogonal_init<float>(10, 4, 1.0, a) == orthogonal_init<float>(10, 4, 1.0, b));
}
