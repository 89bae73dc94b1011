#include <catch_amalgamated.hpp>

#include <random>

#include "gnp_vamp/messages.hpp"
#include "test_support.hpp"

using namespace gnp_vamp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
}  // namespace

TEST_CASE("ext_combine divides out the incoming message", "[messages]") {
  const PrecisionBounds b;
  const auto out = ext_combine({vec({2.0}), 3.0}, {vec({-1.0}), 1.0}, b);
  CHECK(out.precision == 2.0);
  CHECK(out.mean[0] == 3.5);
}

TEST_CASE("ext_combine passes identical means through", "[messages]") {
  const auto out = ext_combine({vec({5.0, 5.0}), 2.0}, {vec({5.0, 5.0}), 1.0}, PrecisionBounds{});
  CHECK(out.precision == 1.0);
  CHECK(out.mean == vec({5.0, 5.0}));
}

TEST_CASE("ext_combine clamps a negative difference to gamma_min", "[messages]") {
  const auto out = ext_combine({vec({0.0}), 1.0}, {vec({0.0}), 2.0}, PrecisionBounds{1e-11, 1e11});
  CHECK(out.precision == 1e-11);
  CHECK(out.mean[0] == 0.0);
}

TEST_CASE("ext_combine rejects a length mismatch", "[messages]") {
  CHECK_THROWS_AS(ext_combine({vec({1.0, 2.0}), 2.0}, {vec({1.0}), 1.0}, PrecisionBounds{}),
                  InvalidArgument);
}

TEST_CASE("ext_combine above gamma_max keeps the exact extrinsic mean", "[messages]") {
  // difference 1e13 is capped to 1e11, but the mean stays (gp*mp - gi*mi)/diff
  const PrecisionBounds b;
  const auto out = ext_combine({vec({1.0, -2.0}), 1e13 + 1.0}, {vec({0.5, 4.0}), 1.0}, b);
  CHECK(out.precision == b.gamma_max);
  CHECK_THAT(out.mean[0], WithinRel((1e13 + 1.0 - 0.5) / 1e13, 1e-15));
  CHECK_THAT(out.mean[1], WithinRel((-2.0 * (1e13 + 1.0) - 4.0) / 1e13, 1e-15));
}

TEST_CASE("clamp_precision", "[messages]") {
  const PrecisionBounds b{1e-11, 1e11};
  CHECK(clamp_precision(5.0, b) == 5.0);
  CHECK(clamp_precision(-0.3, b) == 1e-11);
  CHECK(clamp_precision(1e20, b) == 1e11);
  CHECK(b.valid());
  CHECK_FALSE(PrecisionBounds{1.0, 1.0}.valid());
  CHECK_FALSE(PrecisionBounds{0.0, 1.0}.valid());
}

TEST_CASE("re-fusing the extrinsic message recovers the posterior", "[messages][property]") {
  std::mt19937_64 rng(7);
  const PrecisionBounds b;
  for (int k = 0; k < 200; ++k) {
    const double gi = testing_support::log_uniform(rng, 1e-3, 1e3);
    const double gp = gi + testing_support::log_uniform(rng, 1e-3, 1e3);
    const GaussianMessage post{testing_support::gaussian_vector(rng, 5, 3.0), gp};
    const GaussianMessage in{testing_support::gaussian_vector(rng, 5, 3.0), gi};
    const auto ext = ext_combine(post, in, b);
    CHECK_THAT(ext.precision + in.precision, WithinRel(gp, 1e-12));
    const Vector fused = (ext.precision * ext.mean + in.precision * in.mean) / (ext.precision + in.precision);
    CHECK(testing_support::rel_err(fused, post.mean) < 1e-12);
  }
}

TEST_CASE("ext_combine is linear in the means", "[messages][property]") {
  std::mt19937_64 rng(11);
  const PrecisionBounds b;
  for (double c : {-3.0, 0.5, 7.25}) {
    const GaussianMessage post{testing_support::gaussian_vector(rng, 4), 4.0};
    const GaussianMessage in{testing_support::gaussian_vector(rng, 4), 1.5};
    const auto base = ext_combine(post, in, b);
    const auto scaled = ext_combine({c * post.mean, post.precision}, {c * in.mean, in.precision}, b);
    CHECK(scaled.precision == base.precision);
    CHECK(testing_support::rel_err(scaled.mean, c * base.mean) < 1e-14);
  }
}
