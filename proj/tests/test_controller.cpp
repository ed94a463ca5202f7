#include <cmath>
#include <random>

#include "doctest.h"
#include "rvp/controller.hpp"
#include "rvp/errors.hpp"

using namespace rvp;

namespace {

// Steering from the arc through the rear axle and the waypoint: chord length
// ell at bearing alpha gives radius ell / (2 sin alpha).
double geometric_steering(const Point2& g, double wheelbase) {
  const double alpha = std::atan2(g.y, g.x);
  if (alpha == 0.0) return 0.0;
  const double radius = norm(g) / (2.0 * std::sin(alpha));
  return std::atan(wheelbase / radius);
}

double state_error(const VehicleState& a, const VehicleState& b) {
  return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(normalize_angle(a.theta - b.theta))});
}

}  // namespace

TEST_CASE("pure_pursuit_steering examples") {
  VehicleParams p;
  CHECK(pure_pursuit_steering({1.0, 0.0}, p).delta == 0.0);
  const auto c = pure_pursuit_steering({0.8, 0.6}, p);
  CHECK(std::abs(c.delta - std::atan(0.39)) <= 1e-12);
  CHECK(c.delta == doctest::Approx(0.37185).epsilon(1e-4));
  CHECK(std::abs(c.delta - geometric_steering({0.8, 0.6}, p.wheelbase)) <= 1e-12);

  const Point2 g{0.1, 0.99499};
  const auto open = pure_pursuit_steering(g, p);
  CHECK_FALSE(open.clamped);
  CHECK(open.delta == doctest::Approx(std::atan(0.6467)).epsilon(1e-3));
  p.max_steer = 30.0 * kPi / 180.0;
  const auto clamped = pure_pursuit_steering(g, p);
  CHECK(clamped.clamped);
  CHECK(clamped.delta == doctest::Approx(0.5236).epsilon(1e-4));

  CHECK_THROWS_AS(pure_pursuit_steering({0.0, 1.0}, p), WaypointBehindAxle);
  CHECK_THROWS_AS(pure_pursuit_steering({-1.0, 0.0}, p), WaypointBehindAxle);
}

TEST_CASE("pure pursuit agrees with the geometric oracle; clamping keeps sign") {
  VehicleParams p;
  p.max_steer = 0.5 * kPi - 1e-9;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ua(-0.5 * kPi + 1e-3, 0.5 * kPi - 1e-3), ul(0.1, 5);
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(rng), l = ul(rng);
    const Point2 g{l * std::cos(a), l * std::sin(a)};
    CHECK(std::abs(pure_pursuit_steering(g, p).delta - geometric_steering(g, p.wheelbase)) <= 1e-12);
  }
  VehicleParams tight;
  for (int i = 0; i < 10000; ++i) {
    const double a = ua(rng), l = ul(rng);
    const auto c = pure_pursuit_steering({l * std::cos(a), l * std::sin(a)}, tight);
    CHECK(std::abs(c.delta) <= std::abs(c.raw));
    CHECK(c.delta * c.raw >= 0.0);
    CHECK(std::abs(c.delta) <= tight.max_steer);
  }
}

TEST_CASE("bicycle_step examples") {
  VehicleParams p;
  const auto s = bicycle_step({0, 0, 0}, 0.0, p, 0.1);
  CHECK(s.x == doctest::Approx(0.1));
  CHECK(s.y == 0.0);
  CHECK(s.theta == 0.0);

  // Full circle of radius L / tan(pi/4) = L.
  const double radius = p.wheelbase;
  const double period = 2 * kPi * radius / p.speed;
  const int n = 1000;
  VehicleState x{0, 0, 0};
  for (int i = 0; i < n; ++i) x = bicycle_step(x, kPi / 4, p, period / n);
  CHECK(state_error(x, {0, 0, 0}) <= 1e-4);
}

TEST_CASE("bicycle_step matches the closed-form circle and converges at fourth order") {
  VehicleParams p;
  const double delta = 0.3, t_end = 1.0;
  const double omega = p.speed / p.wheelbase * std::tan(delta);
  const VehicleState exact{std::sin(omega * t_end) / omega * p.speed, (1 - std::cos(omega * t_end)) / omega * p.speed,
                           normalize_angle(omega * t_end)};
  auto run = [&](int n) {
    VehicleState x{0, 0, 0};
    for (int i = 0; i < n; ++i) x = bicycle_step(x, delta, p, t_end / n);
    return x;
  };
  const double e1 = state_error(run(20), exact), e2 = state_error(run(40), exact);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.2));
  CHECK(state_error(run(400), exact) < 1e-9);
}

TEST_CASE("turning_radius examples") {
  CHECK(*turning_radius(kPi / 4, 0.325) == doctest::Approx(0.325));
  CHECK(*turning_radius(-kPi / 4, 0.325) == doctest::Approx(-0.325));
  CHECK(*turning_radius(0.1, 1.0) == doctest::Approx(9.9666).epsilon(1e-5));
  CHECK_FALSE(turning_radius(0.0, 1.0).has_value());
}

TEST_CASE("vehicle parameter validation") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.wheelbase = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.max_steer = kPi;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}
