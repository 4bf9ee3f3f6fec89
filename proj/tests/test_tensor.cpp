#include <stdexcept>

#include "doctest.h"
#include "stae/rng.hpp"
#include "stae/tensor.hpp"

using stae::Tensor;

TEST_CASE("tensor shape and data length stay consistent") {
  Tensor t({2, 3, 4});
  CHECK(t.size() == 24);
  CHECK(t.rank() == 3);
  CHECK_THROWS_AS(Tensor({2, 0, 4}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("elementwise helpers") {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {10, 20, 30, 40});
  a.add(b);
  CHECK(a[3] == 44);
  a.axpy(-1.0, b);
  CHECK(a[0] == 1);
  a.hadamard(b);
  CHECK(a[2] == 90);
  CHECK(a.sum() == doctest::Approx(10 + 40 + 90 + 160));
  Tensor c({3}, {1, 2, 3});
  CHECK_THROWS_AS(a.add(c), std::invalid_argument);
}

TEST_CASE("channel concat and slicing round-trip") {
  Tensor a({1, 2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2, 2}, {5, 6, 7, 8, 9, 10, 11, 12});
  Tensor cat = stae::concat_channels({&a, &b});
  CHECK(cat.shape() == std::vector<std::size_t>{3, 2, 2});
  CHECK(cat.at(0, 1, 1) == 4);
  CHECK(cat.at(2, 0, 0) == 9);
  Tensor back = stae::slice_channels(cat, 1, 2);
  CHECK(back.values() == b.values());
  Tensor acc({3, 2, 2});
  stae::add_into_channels(acc, 1, b);
  CHECK(acc.at(1, 0, 0) == 5);
  CHECK(acc.at(0, 0, 0) == 0);
}

TEST_CASE("rng stream is reproducible and uniform draws stay in range") {
  stae::Rng r1(42), r2(42);
  for (int i = 0; i < 100; ++i) {
    const double a = r1.uniform(-2.0, 2.0);
    CHECK(a == r2.uniform(-2.0, 2.0));
    CHECK(a >= -2.0);
    CHECK(a < 2.0);
  }
  std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> w = v;
  stae::Rng r3(7), r4(7);
  r3.shuffle(v);
  r4.shuffle(w);
  CHECK(v == w);
}
