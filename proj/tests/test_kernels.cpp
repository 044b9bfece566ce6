#include <doctest.h>

#include <random>
#include <vector>

#include "kbqa/neural/kernels.hpp"

using namespace kbqa::neural::kernels;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

const std::pair<std::size_t, std::size_t> kShapes[] = {{1, 1}, {3, 7}, {64, 65}, {300, 400}, {1200, 80}};

}  // namespace

TEST_CASE("gemv: parallel matches serial exactly") {
  std::mt19937_64 rng(1);
  for (auto [r, c] : kShapes) {
    const auto a = random_values(r * c, rng);
    const auto x = random_values(c, rng);
    const auto init = random_values(r, rng);
    for (bool acc : {false, true}) {
      auto ys = init, yp = init;
      serial::gemv({a, r, c}, x, ys, acc);
      parallel::gemv({a, r, c}, x, yp, acc);
      CHECK(ys == yp);
      // naive reference
      for (std::size_t i = 0; i < r; ++i) {
        double s = acc ? init[i] : 0.0;
        for (std::size_t j = 0; j < c; ++j) s += a[i * c + j] * x[j];
        CHECK(ys[i] == doctest::Approx(s).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("gemv_t: parallel matches serial exactly") {
  std::mt19937_64 rng(2);
  for (auto [r, c] : kShapes) {
    const auto a = random_values(r * c, rng);
    const auto x = random_values(r, rng);
    const auto init = random_values(c, rng);
    auto ys = init, yp = init;
    serial::gemv_t({a, r, c}, x, ys);
    parallel::gemv_t({a, r, c}, x, yp);
    CHECK(ys == yp);
    for (std::size_t j = 0; j < c; ++j) {
      double s = init[j];
      for (std::size_t i = 0; i < r; ++i) s += a[i * c + j] * x[i];
      CHECK(ys[j] == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("ger: parallel matches serial exactly") {
  std::mt19937_64 rng(3);
  for (auto [r, c] : kShapes) {
    const auto init = random_values(r * c, rng);
    const auto u = random_values(r, rng);
    const auto v = random_values(c, rng);
    auto as = init, ap = init;
    serial::ger(as, r, c, u, v);
    parallel::ger(ap, r, c, u, v);
    CHECK(as == ap);
    CHECK(as[r * c - 1] == init[r * c - 1] + u[r - 1] * v[c - 1]);
  }
}

TEST_CASE("conv1d_same: parallel matches serial exactly") {
  std::mt19937_64 rng(4);
  struct Shape {
    std::size_t steps, channels, filters, width;
  };
  for (auto [steps, channels, filters, width] :
       std::vector<Shape>{{3, 1, 1, 2}, {36, 300, 50, 2}, {5, 8, 4, 3}, {2, 4, 3, 5}}) {
    const auto in = random_values(steps * channels, rng);
    const auto w = random_values(filters * width * channels, rng);
    const auto b = random_values(filters, rng);
    std::vector<double> os(steps * filters), op(steps * filters);
    serial::conv1d_same(in, steps, channels, w, filters, width, b, os);
    parallel::conv1d_same(in, steps, channels, w, filters, width, b, op);
    CHECK(os == op);
  }
}

TEST_CASE("conv1d_same hand example") {
  const std::vector<double> in = {1, 2, 3}, w = {1, 1}, b = {0};
  std::vector<double> out(3);
  serial::conv1d_same(in, 3, 1, w, 1, 2, b, out);
  CHECK(out == std::vector<double>{1, 3, 5});
}
