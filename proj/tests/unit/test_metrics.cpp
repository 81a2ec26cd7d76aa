#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fcgrad/common/error.hpp"
#include "fcgrad/common/rng.hpp"
#include "fcgrad/metrics/metrics.hpp"

using namespace fcg;
using namespace fcg::metrics;

using V = std::vector<double>;

TEST_SUITE("metrics") {

TEST_CASE("alpha fairness") {
  CHECK(alpha_fairness(V{1, 1, 1, 1}, 0.0) == 4.0);
  CHECK(alpha_fairness(V{1, 1, 1, 1}, 1.0) == 0.0);
  CHECK(alpha_fairness(V{4, 1}, 2.0) == doctest::Approx(-1.25));
  try {
    alpha_fairness(V{1, 0}, 1.0);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  CHECK_THROWS_AS(alpha_fairness(V{1, -1}, 2.0), Error);
}

TEST_CASE("report on equal returns") {
  const auto r = report(V{5, 5, 5, 5});
  CHECK(r.mean == 5.0);
  CHECK(r.geomean == doctest::Approx(5.0));
  CHECK(r.min == 5.0);
  CHECK(r.gini == 0.0);
  CHECK(r.jain == 1.0);
  CHECK_FALSE(r.has_negative);
}

TEST_CASE("report on hand-evaluated vectors") {
  auto r = report(V{0, 1});
  CHECK(r.gini == doctest::Approx(0.5));
  CHECK(r.jain == doctest::Approx(0.5));
  CHECK(r.geomean == doctest::Approx(std::sqrt(kGeoMeanFloor)));

  r = report(V{1, 2, 3, 4});
  CHECK(r.mean == 2.5);
  CHECK(r.gini == doctest::Approx(0.25));
  CHECK(r.jain == doctest::Approx(100.0 / 120.0));
}

TEST_CASE("gini and jain edge cases") {
  CHECK(gini(V{7}) == 0.0);
  CHECK(jain(V{7}) == 1.0);
  CHECK(gini(V{1, 0, 0, 0}) == doctest::Approx(0.75));
  CHECK(jain(V{1, 0, 0, 0}) == doctest::Approx(0.25));
  CHECK(gini(V{2, 2, 3, 3}) > 0.0);
  CHECK(gini(V{0, 0, 0}) == 0.0);
  CHECK(jain(V{0, 0, 0}) == 1.0);
  CHECK_THROWS_AS(report(V{}), Error);
}

TEST_CASE("negative returns are flagged, shifted only on request") {
  const auto raw = report(V{-2, 1});
  CHECK(raw.has_negative);
  CHECK(raw.gini == doctest::Approx(gini(V{-2, 1})));
  ReportOptions opts;
  opts.shift_negative = true;
  const auto shifted = report(V{-2, 1}, opts);
  CHECK(shifted.gini == doctest::Approx(gini(V{0, 3})));
  CHECK(shifted.mean == -0.5);
}

TEST_CASE("alpha utilities in the report") {
  ReportOptions opts;
  opts.alphas = {0.0, 1.0, 2.0};
  const auto r = report(V{4, 1}, opts);
  CHECK(r.alpha_utilities.at(0.0) == 5.0);
  CHECK(r.alpha_utilities.at(1.0) == doctest::Approx(std::log(4.0)));
  CHECK(r.alpha_utilities.at(2.0) == doctest::Approx(-1.25));
  CHECK(r.sum_log == doctest::Approx(std::log(4.0)));
}

TEST_CASE("scale and permutation invariance, ordering of aggregates") {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(8);
    V r(n);
    for (double& x : r) x = 10.0 * rng.uniform();
    const double c = 0.01 + 100.0 * rng.uniform();
    V scaled = r;
    for (double& x : scaled) x *= c;
    V perm = r;
    rng.shuffle(std::span<double>(perm));
    CHECK(gini(scaled) == doctest::Approx(gini(r)).epsilon(1e-12));
    CHECK(jain(scaled) == doctest::Approx(jain(r)).epsilon(1e-12));
    CHECK(gini(perm) == doctest::Approx(gini(r)).epsilon(1e-12));
    CHECK(jain(perm) == doctest::Approx(jain(r)).epsilon(1e-12));
    const auto rep = report(r);
    CHECK(rep.mean >= rep.geomean * (1 - 1e-12));
    CHECK(rep.geomean >= rep.min * (1 - 1e-12));
    CHECK(rep.gini >= 0.0);
    CHECK(rep.gini <= 1.0);
    CHECK(rep.jain >= 1.0 / double(n) - 1e-12);
    CHECK(rep.jain <= 1.0 + 1e-12);
    double sum = 0.0;
    for (double x : r) sum += x;
    CHECK(alpha_fairness(r, 0.0) == doctest::Approx(sum).epsilon(1e-15));
  }
}

}
