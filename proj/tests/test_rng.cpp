#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "vropt/rng.hpp"

using namespace vropt;

TEST_CASE("identical seeds give identical streams") {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams") {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  REQUIRE(same == 0);
}

TEST_CASE("child streams are stable and disjoint from the parent") {
  Rng parent(42);
  Rng c1 = parent.child("dataset");
  // Consuming the parent must not affect later child derivation.
  for (int i = 0; i < 17; ++i) parent.next_u64();
  Rng c2 = Rng(42).child("dataset");
  for (int i = 0; i < 100; ++i) REQUIRE(c1.next_u64() == c2.next_u64());

  // Parent and child outputs do not collide positionally or as sets.
  Rng p(42), c(Rng(42).child("dataset"));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) seen.insert(p.next_u64());
  for (int i = 0; i < 2000; ++i) REQUIRE(!seen.count(c.next_u64()));
}

TEST_CASE("distinct labels give distinct children") {
  Rng root(3);
  Rng a = root.child("model_init");
  Rng b = root.child("dataset");
  Rng c = root.child(std::uint64_t{0});
  Rng d = root.child(std::uint64_t{1});
  REQUIRE(a.next_u64() != b.next_u64());
  REQUIRE(c.next_u64() != d.next_u64());
}

TEST_CASE("uniform stays in [0,1)") {
  Rng r(11);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("trunc_normal_init respects the truncation bound") {
  Rng r(7);
  auto xs = trunc_normal_init(3, 0.2, r);
  REQUIRE(xs.size() == 3);
  for (double x : xs) {
    REQUIRE(x >= -0.4);
    REQUIRE(x <= 0.4);
  }
}

TEST_CASE("trunc_normal_init empirical mean is near zero") {
  Rng r(123);
  auto xs = trunc_normal_init(10000, 0.2, r);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  REQUIRE(std::fabs(mean) <= 0.02);
}

TEST_CASE("trunc_normal_init is deterministic") {
  Rng a(5), b(5);
  auto xa = trunc_normal_init(1, 0.2, a);
  auto xb = trunc_normal_init(1, 0.2, b);
  REQUIRE(xa[0] == xb[0]);
}

TEST_CASE("trunc_normal_init rejects bad arguments") {
  Rng r(1);
  REQUIRE_THROWS_AS(trunc_normal_init(0, 0.2, r), std::invalid_argument);
  REQUIRE_THROWS_AS(trunc_normal_init(-3, 0.2, r), std::invalid_argument);
  REQUIRE_THROWS_AS(trunc_normal_init(3, 0.0, r), std::invalid_argument);
  REQUIRE_THROWS_AS(trunc_normal_init(3, -1.0, r), std::invalid_argument);
}
