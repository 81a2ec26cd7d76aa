#include "doctest.h"

#include <cmath>

#include "fcgrad/common/error.hpp"
#include "fcgrad/common/rng.hpp"
#include "fcgrad/gradcore/gradcore.hpp"

using namespace fcg;
using namespace fcg::gradcore;

namespace {

void check_vec(const ParamVector& got, const ParamVector& want, double tol = 1e-15) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol));
}

ParamVector random_vec(Rng& rng, std::size_t n) {
  ParamVector v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("gradcore") {

TEST_CASE("conflict detection follows the sign of the inner product") {
  CHECK(detect_conflict(ParamVector{1, 0}, ParamVector{-1, 0}));
  CHECK_FALSE(detect_conflict(ParamVector{1, 0}, ParamVector{0, 1}));
  CHECK_FALSE(detect_conflict(ParamVector{1, 2}, ParamVector{3, -1}));
}

TEST_CASE("conflict detection rejects bad input") {
  CHECK_THROWS_AS(detect_conflict(ParamVector{1, 0}, ParamVector{1}), Error);
  CHECK_THROWS_AS(detect_conflict(ParamVector{NAN, 0}, ParamVector{1, 0}), Error);
}

TEST_CASE("normal-plane projection") {
  check_vec(project_onto_normal_plane(ParamVector{1, 0}, ParamVector{-1, 1}), {0.5, 0.5});
  check_vec(project_onto_normal_plane(ParamVector{0, 1}, ParamVector{0, 1}), {0, 0});
  check_vec(project_onto_normal_plane(ParamVector{3, 4}, ParamVector{1, 0}), {0, 4});
  try {
    project_onto_normal_plane(ParamVector{1, 1}, ParamVector{0, 0});
    FAIL("expected a degenerate-vector error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateVector);
  }
}

TEST_CASE("fcgrad branches") {
  auto r = combine_fcgrad({ParamVector{1, 0}, ParamVector{-1, 1}, 0.0, 1.0, 0.5});
  CHECK(r.conflict);
  CHECK(r.branch == Branch::ProjectIndOntoColNormal);
  check_vec(r.direction, {0.5, 0.5});

  r = combine_fcgrad({ParamVector{1, 0}, ParamVector{-1, 1}, 2.0, 1.0, 0.5});
  CHECK(r.branch == Branch::ProjectColOntoIndNormal);
  check_vec(r.direction, {0, 1});

  r = combine_fcgrad({ParamVector{1, 0}, ParamVector{1, 0}, 3.0, -1.0, 0.7});
  CHECK_FALSE(r.conflict);
  CHECK(r.branch == Branch::NonConflictBlend);
  check_vec(r.direction, {1, 0});
}

TEST_CASE("fcgrad value tie takes the individual-projection branch") {
  const auto r = combine_fcgrad({ParamVector{1, 0}, ParamVector{-1, 1}, 1.0, 1.0, 0.5});
  CHECK(r.branch == Branch::ProjectIndOntoColNormal);
}

TEST_CASE("fcgrad conflict branch is invariant to positive rescaling") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    ParamVector a = random_vec(rng, 5), b = random_vec(rng, 5);
    const double va = rng.normal(), vb = rng.normal();
    const double sa = 0.01 + 10 * rng.uniform(), sb = 0.01 + 10 * rng.uniform();
    ParamVector a2 = a, b2 = b;
    for (double& x : a2) x *= sa;
    for (double& x : b2) x *= sb;
    CHECK(combine_fcgrad({a, b, va, vb, 0.5}).branch ==
          combine_fcgrad({a2, b2, va, vb, 0.5}).branch);
  }
}

TEST_CASE("fcgrad conflict output keeps ascent on its own objective") {
  Rng rng(3);
  int conflicts = 0;
  for (int t = 0; t < 500; ++t) {
    ParamVector gi = random_vec(rng, 8), gc = random_vec(rng, 8);
    const auto r = combine_fcgrad({gi, gc, rng.normal(), rng.normal(), 0.5});
    if (!r.conflict) {
      CHECK(dot(r.direction, gi) > 0.0);
      CHECK(dot(r.direction, gc) > 0.0);
      continue;
    }
    ++conflicts;
    const bool ind = r.branch == Branch::ProjectIndOntoColNormal;
    const ParamVector& own = ind ? gi : gc;
    const ParamVector& other = ind ? gc : gi;
    const double expected =
        (norm_sq(gi) * norm_sq(gc) - dot(gi, gc) * dot(gi, gc)) / norm_sq(other);
    CHECK(dot(r.direction, own) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(dot(r.direction, other)) <= 1e-9 * norm(r.direction) * norm(other) + 1e-300);
  }
  CHECK(conflicts > 100);
}

TEST_CASE("weighted endpoints and midpoint") {
  const ParamVector gi{0.3, -1.7, 2.25}, gc{-4.0, 0.1, 9.5};
  CHECK(combine_weighted(gi, gc, 0.0).direction == gi);
  CHECK(combine_weighted(gi, gc, 1.0).direction == gc);
  check_vec(combine_weighted(ParamVector{2, 0}, ParamVector{0, 2}, 0.5).direction, {1, 1});
  CHECK(combine_weighted(ParamVector{1, 0}, ParamVector{-1, 0}, 0.5).conflict);
}

TEST_CASE("pcgrad") {
  check_vec(combine_pcgrad(ParamVector{1, 0}, ParamVector{-1, 1}).direction, {0.25, 0.75});
  check_vec(combine_pcgrad(ParamVector{1, 1}, ParamVector{1, 1}).direction, {1, 1});
  check_vec(combine_pcgrad(ParamVector{1, 0}, ParamVector{0, 1}).direction, {0.5, 0.5});
}

TEST_CASE("pcgrad is symmetric") {
  Rng rng(5);
  for (int t = 0; t < 300; ++t) {
    const ParamVector a = random_vec(rng, 6), b = random_vec(rng, 6);
    CHECK(combine_pcgrad(a, b).direction == combine_pcgrad(b, a).direction);
  }
}

TEST_CASE("aga sign rule") {
  const HvpOperator zero = [](ConstParams v) { return ParamVector(v.size(), 0.0); };
  check_vec(combine_aga(ParamVector{1, 2}, ParamVector{3, -1}, zero, 1.0).direction, {4, 1});

  // V_col = -||theta||^2 at theta = (1, 0): H = -2 I.
  const HvpOperator quad = [](ConstParams v) {
    ParamVector out(v.begin(), v.end());
    for (double& x : out) x *= -2.0;
    return out;
  };
  check_vec(combine_aga(ParamVector{0, 0}, ParamVector{-2, 0}, quad, 1.0).direction, {-6, 0});
  check_vec(combine_aga(ParamVector{1, 0}, ParamVector{-2, 0}, quad, 1.0).direction, {-7, 0});
}

TEST_CASE("degenerate gradients pass through") {
  const auto r = combine_fcgrad({ParamVector{0, 0}, ParamVector{1, 1}, 0.0, 1.0, 0.5});
  CHECK_FALSE(r.conflict);
  const auto p = combine_pcgrad(ParamVector{1e-20, 0}, ParamVector{-1, 0});
  for (double x : p.direction) CHECK(std::isfinite(x));
}

TEST_CASE("combiners are bit-reproducible") {
  Rng rng(9);
  const ParamVector a = random_vec(rng, 32), b = random_vec(rng, 32);
  CHECK(combine_fcgrad({a, b, 0.1, 0.2, 0.5}).direction ==
        combine_fcgrad({a, b, 0.1, 0.2, 0.5}).direction);
  CHECK(combine_pcgrad(a, b).direction == combine_pcgrad(a, b).direction);
}

}
