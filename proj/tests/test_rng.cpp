#include <doctest.h>

#include "airfl/rng.hpp"

TEST_SUITE("rng") {

TEST_CASE("identical seeds give identical streams") {
  airfl::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  airfl::Rng c(42), d(43);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("forked streams are independent of parent consumption") {
  airfl::Rng parent(7);
  airfl::Rng fork_before = parent.fork(1);
  parent.normal();
  parent.normal();
  airfl::Rng fork_after = parent.fork(1);
  CHECK(fork_before.next_u64() == fork_after.next_u64());
  CHECK(parent.fork(1).next_u64() != parent.fork(2).next_u64());
}

TEST_CASE("normal moments") {
  airfl::Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("complex normal has unit total variance and zero pseudo-variance") {
  airfl::Rng rng(456);
  const int n = 200000;
  double power = 0.0;
  std::complex<double> pseudo{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const std::complex<double> z = rng.complex_normal();
    power += std::norm(z);
    pseudo += z * z;
  }
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(pseudo) / n < 0.01);
}

}  // TEST_SUITE
