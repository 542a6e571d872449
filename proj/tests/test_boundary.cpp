#include <random>

#include "doctest.h"
#include "focal/boundary.hpp"

using namespace focal;

namespace {

std::int64_t ceil_div_pow2(std::int64_t k, int i) { return (k + (std::int64_t{1} << i) - 1) >> i; }

// d(1, (k, 0)) in the 2-adic family: min over i of 2i + ceil(k / 2^i).
std::int64_t dyadic_length(std::int64_t k) {
  std::int64_t best = k;
  for (int i = 0; i < 62 && (std::int64_t{1} << i) <= 2 * k; ++i) best = std::min(best, 2 * i + ceil_div_pow2(k, i));
  return best;
}

std::vector<GroupPoint> random_points(const Family& f, std::size_t count, std::mt19937_64& rng) {
  const auto as = f.window_A(Window::parse("lo=-2,hi=3,den=2,abs=1"), 4096);
  std::vector<GroupPoint> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(evaluate(f, random_word(as, 1 + rng() % 8, rng)));
  return out;
}

}  // namespace

TEST_CASE("translation numbers") {
  const auto lamp = parse_family("lamplighter:2");
  const auto t1 = translation_number(*lamp, alpha_point(*lamp), 16);
  CHECK(t1.estimate == 1);
  REQUIRE(t1.exact());
  CHECK(*t1.exact_value == 1);
  CHECK(translation_number(*lamp, identity_point(*lamp), 16).estimate == 0);
  for (int k = -8; k <= 8; ++k) {
    const auto t = translation_number(*lamp, alpha_point(*lamp, k), 12);
    CHECK(t.estimate == std::abs(k));
    CHECK(*t.exact_value == std::abs(k));
  }

  const auto nadic = parse_family("nadic:2");
  const auto& nf = dynamic_cast<const NAdicFamily&>(*nadic);
  const auto g = h_point(nf.make(1));
  for (std::int64_t N : {8, 64, 512}) {
    const auto t = translation_number(*nadic, g, N);
    mpq_class expected(dyadic_length(N), N);
    expected.canonicalize();
    CHECK(t.estimate == expected);
    CHECK(*t.exact_value == 0);
  }
  CHECK(translation_number(*nadic, g, 512).estimate < translation_number(*nadic, g, 8).estimate);
  CHECK(dyadic_length(5) == 5);
}

TEST_CASE("translation length of hyperbolic elements against orbit lengths") {
  std::mt19937_64 rng(12);
  const auto f = parse_family("lamplighter:2");
  for (const auto& p : random_points(*f, 60, rng)) {
    if (p.m == 0 || std::abs(p.m) > 3) continue;
    std::int64_t prev = 0;
    for (std::int64_t n = 1; n <= 64; ++n) {
      const std::int64_t d = word_length(*f, power(*f, p, n));
      CHECK(d >= std::abs(p.m) * n);
      if (n > 32) CHECK(d - prev == std::abs(p.m));
      prev = d;
    }
    CHECK(translation_number(*f, p, 64).exact_value == std::abs(p.m));
  }
}

TEST_CASE("isometry types") {
  const auto lamp = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*lamp);
  const auto e = isometry_type(*lamp, h_point(lf.lamp(0)), 32);
  CHECK(e.kind == IsometryKind::Elliptic);
  CHECK(e.exact);

  const auto nadic = parse_family("nadic:2");
  const auto& nf = dynamic_cast<const NAdicFamily&>(*nadic);
  const auto p = isometry_type(*nadic, h_point(nf.make(1)), 64);
  CHECK(p.kind == IsometryKind::Parabolic);
  CHECK(p.exact);
  // the orbit is unbounded and nondecreasing
  for (std::int64_t k = 1; k < 200; ++k) CHECK(dyadic_length(k) <= dyadic_length(k + 1));

  const auto h = isometry_type(*lamp, {lf.lamp(-1), -2}, 16);
  CHECK(h.kind == IsometryKind::Hyperbolic);
  CHECK(h.exact);
  CHECK(to_string(IsometryKind::Parabolic) == "Parabolic");
  CHECK(isometry_type(*lamp, identity_point(*lamp), 4).kind == IsometryKind::Elliptic);
}

TEST_CASE("horokernel") {
  const auto f = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*f);
  const auto one = identity_point(*f);
  CHECK(horokernel(*f, one, alpha_point(*f)) == 1);
  // d(1, alpha^-N) = N and d(alpha, alpha^-N) = N + 1
  CHECK(word_length(*f, alpha_point(*f, -20)) == 20);
  CHECK(distance(*f, alpha_point(*f), alpha_point(*f, -20)) == 21);

  std::mt19937_64 rng(13);
  for (const auto& x : random_points(*f, 40, rng)) CHECK(horokernel(*f, x, x) == 0);
  for (const auto& a : f->window_A(Window::parse("lo=0,hi=3"), 64)) {
    CHECK(std::abs(horokernel(*f, one, h_point(a))) <= 1);
  }

  HorokernelOptions tight;
  tight.max_horizon = 2;
  try {
    horokernel(*f, one, {lf.lamp(-9), 0}, tight);
    FAIL("expected StabilizationError");
  } catch (const StabilizationError& err) {
    CHECK_FALSE(err.trace().empty());
  }
  CHECK_THROWS_AS(horokernel(*parse_family("identity_alpha(lamplighter:2)"), one, one), UncheckedFamily);
}

TEST_CASE("busemann character") {
  const auto f = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*f);
  CHECK(busemann_quasicharacter(*f, alpha_point(*f), 16).value == 1);
  CHECK(busemann_quasicharacter(*f, alpha_point(*f), 16).estimate == 1);
  CHECK(busemann_quasicharacter(*f, h_point(lf.lamp(-3)), 16).value == 0);
  const GroupPoint g = multiply(*f, h_point(lf.lamp(1)), alpha_point(*f, -2));
  CHECK(busemann_quasicharacter(*f, g, 16).value == -2);

  // delta of a radius-4 ball bounds the sandwich constant
  const auto delta = four_point_delta(ball_points(*f, 4).distances).delta;
  const mpq_class slack = mpq_class(delta.twice()) + 2;
  std::mt19937_64 rng(14);
  for (const char* spec : {"lamplighter:2", "nadic:2"}) {
    const auto fam = parse_family(spec);
    for (const auto& x : random_points(*fam, 80, rng)) {
      const auto q = busemann_quasicharacter(*fam, x, 8);
      CHECK(q.value == x.m);
      CHECK(q.defect_bound == 0);
      CHECK(q.horokernel_gap <= slack);
      CHECK(q.horokernel_gap == abs(q.value - q.horokernel_value));
      for (int n = -8; n <= 8; ++n) {
        CHECK(busemann_quasicharacter(*fam, power(*fam, x, n), 2).value == n * q.value);
      }
      const bool hyperbolic = isometry_type(*fam, x, 32).kind == IsometryKind::Hyperbolic;
      CHECK(hyperbolic == (q.value != 0));
    }
  }
}

TEST_CASE("action types") {
  const auto f = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*f);
  const auto alpha = alpha_point(*f);

  const auto lineal = action_type(*f, {alpha}, 8);
  CHECK(lineal.kind == ActionKind::Lineal);
  CHECK(lineal.axis_distance == 0);

  const auto focal = action_type(*f, {alpha, h_point(lf.lamp(0))}, 8);
  CHECK(focal.kind == ActionKind::Focal);
  CHECK(*focal.axis_distance > *focal.axis_threshold);

  const auto bounded = action_type(*f, {h_point(lf.lamp(0)), h_point(lf.lamp(1)), h_point(lf.lamp(2))}, 8);
  CHECK(bounded.kind == ActionKind::Bounded);

  ActionTypeOptions conj;
  conj.generators_at = [&](std::int64_t l) {
    std::vector<GroupPoint> out;
    for (std::int64_t j = 0; j <= l; ++j) out.push_back(h_point(lf.lamp(-j)));
    return out;
  };
  const auto horo = action_type(*f, {}, 8, conj);
  CHECK(horo.kind == ActionKind::Horocyclic);
  CHECK(horo.orbit_radius.back() > horo.orbit_radius[4]);

  CHECK(action_type(*f, {alpha}, 2).low_confidence);
  CHECK_THROWS_AS(action_type(*f, {}, 8), std::invalid_argument);
  CHECK(lineal.to_json()["type"] == "Lineal");
}

TEST_CASE("schottky pairs") {
  const auto f = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*f);
  const auto alpha = alpha_point(*f);
  const auto good = schottky_semigroup_check(*f, alpha, multiply(*f, alpha, h_point(lf.lamp(0))), 10);
  CHECK(good.injective);
  CHECK(good.accepted);
  CHECK(good.words == 2047);
  CHECK(good.qi.multiplicative_constant >= 1);

  const auto same = schottky_semigroup_check(*f, alpha, alpha, 6);
  CHECK_FALSE(same.injective);
  CHECK_FALSE(same.accepted);
  CHECK(same.collision.has_value());

  const auto flat = schottky_semigroup_check(*f, h_point(lf.lamp(0)), h_point(lf.lamp(1)), 6);
  CHECK_FALSE(flat.accepted);
}
