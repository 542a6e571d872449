// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "focal/boundary.hpp"
#include "focal/trees.hpp"

using namespace focal;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures_;
      if (first_.empty()) first_ = what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  Result result() const {
    if (failures_ == 0) return {true, notes_};
    return {false, std::to_string(failures_) + " violation(s), first: " + first_ + (notes_.empty() ? "" : "; " + notes_)};
  }

 private:
  std::size_t failures_ = 0;
  std::string first_;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x);
  return buf;
}

// Computed delta per family, reused by the character and classification checks.
std::map<std::string, HalfInteger> computed_delta;

Result delta_bound() {
  Tally t;
  for (const auto& [spec, window] : {std::pair{"lamplighter:2", "lo=-3,hi=3"}, std::pair{"nadic:2", "den=4,abs=4"}}) {
    const auto f = parse_family(spec);
    const auto t0 = std::chrono::steady_clock::now();
    BallOptions opts;
    opts.window = Window::parse(window);
    const Ball ball = ball_points(*f, 6, opts);
    const DeltaReport rep = four_point_delta(ball.distances, {.exhaustive_cutoff = SIZE_MAX});
    const double secs = seconds_since(t0);
    computed_delta[spec] = rep.delta;
    t.expect(ball.exhaustive && rep.exhaustive, std::string(spec) + " scan not exhaustive");
    t.expect(delta_bound_holds(rep.delta, f->n0()),
             std::string(spec) + " delta " + rep.delta.to_string() + " above 16 log2(" + std::to_string(f->n0() + 2) + ")");
    t.expect(secs < 120, std::string(spec) + " took " + fixed(secs) + " s");
    t.note(std::string(spec) + " n=" + std::to_string(ball.points.size()) + " delta=" + rep.delta.to_string() +
           " bound=" + fixed(delta_bound_value(f->n0())) + " " + fixed(secs) + "s");
  }
  return t.result();
}

Result oracle_equivalence() {
  Tally t;
  for (const auto& [spec, window, radius] :
       {std::tuple{"lamplighter:2", "lo=-3,hi=3", 5}, std::tuple{"nadic:2", "den=4,abs=4", 6}}) {
    const auto f = parse_family(spec);
    const BfsOracle bfs = bfs_oracle(*f, Window::parse(window), radius);
    t.expect(!bfs.truncated, std::string(spec) + " window truncated");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < bfs.points.size(); ++i) {
      if (!bfs.trusted[i]) continue;
      const auto len = word_length(*f, bfs.points[i]);
      t.expect(len == bfs.distance[i], std::string(spec) + " " + format_point(*f, bfs.points[i]) + ": closed form " +
                                           std::to_string(len) + " vs search " + std::to_string(bfs.distance[i]));
      agree += len == bfs.distance[i];
    }
    t.expect(bfs.trusted_count() > 0, std::string(spec) + " no trusted elements");
    t.note(std::string(spec) + " " + std::to_string(agree) + "/" + std::to_string(bfs.trusted_count()) + " trusted agree");
  }
  return t.result();
}

Result normal_forms() {
  Tally t;
  std::mt19937_64 rng(0x5eed);
  for (const char* spec : {"lamplighter:2", "lamplighter:3", "nadic:2", "nadic:3", "product(lamplighter:2,nadic:2)"}) {
    const auto f = parse_family(spec);
    const auto as = f->window_A(Window{}, 1u << 14);
    const unsigned k0 = k0_bound(f->n0());
    unsigned max_k = 0;
    for (int s = 0; s < 10000; ++s) {
      const Word w = random_word(as, rng() % 11, rng);
      const GroupPoint x = evaluate(*f, w);
      const NormalForm nf = rewrite_to_normal_form(*f, w);
      t.expect(evaluate(*f, nf.to_word()) == x, std::string(spec) + " rewrite changed " + format_word(*f, w));
      t.expect(nf.length() <= w.size(), std::string(spec) + " rewrite lengthened " + format_word(*f, w));
      const NormalForm geo = geodesic_normal_form(*f, x);
      t.expect(geo.k() <= k0, std::string(spec) + " witness k above k0 for " + format_word(*f, w));
      t.expect(static_cast<std::int64_t>(geo.length()) == word_length(*f, x),
               std::string(spec) + " witness length mismatch for " + format_word(*f, w));
      t.expect(evaluate(*f, geo.to_word()) == x, std::string(spec) + " witness evaluates wrongly");
      max_k = std::max<unsigned>(max_k, static_cast<unsigned>(geo.k()));
    }
    t.note(std::string(spec) + " max k=" + std::to_string(max_k) + " k0=" + std::to_string(k0));
  }
  return t.result();
}

Result distortion() {
  Tally t;
  const auto lamp = distortion_check(*parse_family("lamplighter:2"), 3, Window{});
  t.expect(lamp.pass && lamp.exhaustive, "lamplighter distortion");
  const auto nadic = distortion_check(*parse_family("nadic:2"), 3, Window{}, 1000, 0x5eed);
  t.expect(nadic.pass, "n-adic distortion");
  for (const auto* rep : {&lamp, &nadic}) {
    for (const auto& l : rep->levels) {
      t.expect(l.violations == 0, "m=" + std::to_string(l.m) + " " + l.counterexample.value_or(""));
    }
  }
  t.note("lamplighter max lengths " + std::to_string(lamp.levels[3].max_length) + " (bound " +
         std::to_string(lamp.levels[3].bound) + "), n-adic " + std::to_string(nadic.levels[3].max_length) + " (bound " +
         std::to_string(nadic.levels[3].bound) + ")");
  return t.result();
}

Result busemann() {
  Tally t;
  std::mt19937_64 rng(0x5eed);
  for (const char* spec : {"lamplighter:2", "nadic:2"}) {
    const auto f = parse_family(spec);
    const mpq_class slack = 2 * computed_delta.at(spec).to_rational() + 2;
    t.expect(busemann_quasicharacter(*f, alpha_point(*f), 16).value == 1, std::string(spec) + " beta(alpha) != 1");
    t.expect(horokernel(*f, identity_point(*f), alpha_point(*f)) == 1, std::string(spec) + " h(1, alpha) != 1");
    for (const auto& h : f->window_elements(Window{}, 256)) {
      t.expect(busemann_quasicharacter(*f, h_point(h), 4).value == 0, std::string(spec) + " beta nonzero on H");
    }
    const auto as = f->window_A(Window{}, 1u << 14);
    mpq_class worst = 0;
    for (int s = 0; s < 1000; ++s) {
      const GroupPoint g = evaluate(*f, random_word(as, 1 + rng() % 10, rng));
      const auto q = busemann_quasicharacter(*f, g, 8);
      worst = std::max(worst, q.horokernel_gap);
      t.expect(q.horokernel_gap <= slack, std::string(spec) + " sandwich fails at " + format_point(*f, g));
      for (int n = -8; n <= 8; ++n) {
        t.expect(busemann_quasicharacter(*f, power(*f, g, n), 1).value == n * q.value,
                 std::string(spec) + " homogeneity fails at " + format_point(*f, g));
      }
    }
    t.note(std::string(spec) + " max |beta - h(1,g)| = " + worst.get_str() + " <= " + slack.get_str());
  }
  return t.result();
}

Result classification() {
  Tally t;
  const auto lamp = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*lamp);
  const auto nadic = parse_family("nadic:2");
  const auto& nf = dynamic_cast<const NAdicFamily&>(*nadic);

  const auto e = isometry_type(*lamp, h_point(lf.lamp(0)), 64);
  t.expect(e.kind == IsometryKind::Elliptic && e.exact, "lamp not Elliptic");
  const auto p = isometry_type(*nadic, h_point(nf.make(1)), 64);
  t.expect(p.kind == IsometryKind::Parabolic && p.exact, "n-adic unit not Parabolic");

  std::mt19937_64 rng(0x5eed);
  std::size_t hyperbolic = 0;
  for (const auto& fp : {lamp, nadic}) {
    const auto as = fp->window_A(Window{}, 1u << 14);
    for (int s = 0; s < 200; ++s) {
      const GroupPoint g = evaluate(*fp, random_word(as, 1 + rng() % 10, rng));
      if (g.m == 0 || std::abs(g.m) > 3) continue;
      ++hyperbolic;
      t.expect(isometry_type(*fp, g, 64).kind == IsometryKind::Hyperbolic, "m != 0 not Hyperbolic");
      std::int64_t prev = 0;
      for (std::int64_t n = 1; n <= 64; ++n) {
        const std::int64_t d = word_length(*fp, power(*fp, g, n));
        t.expect(d >= std::abs(g.m) * n, "orbit shorter than |m| n at " + format_point(*fp, g));
        if (n > 32) t.expect(d - prev == std::abs(g.m), "orbit increment != |m| at " + format_point(*fp, g));
        prev = d;
      }
      t.expect(translation_number(*fp, g, 64).exact_value == std::abs(g.m), "tau != |m|");
    }
  }

  ActionTypeOptions opt;
  opt.delta = computed_delta.at("lamplighter:2").to_rational();
  const auto lineal = action_type(*lamp, {alpha_point(*lamp)}, 8, opt);
  t.expect(lineal.kind == ActionKind::Lineal, "<alpha> is " + to_string(lineal.kind));
  const auto focal = action_type(*lamp, {alpha_point(*lamp), h_point(lf.lamp(0))}, 8, opt);
  t.expect(focal.kind == ActionKind::Focal, "<alpha, delta_0> is " + to_string(focal.kind));
  ActionTypeOptions conj = opt;
  conj.generators_at = [&](std::int64_t l) {
    std::vector<GroupPoint> out;
    for (std::int64_t j = 0; j <= l; ++j) out.push_back(h_point(lf.lamp(-j)));
    return out;
  };
  const auto horo = action_type(*lamp, {}, 8, conj);
  t.expect(horo.kind == ActionKind::Horocyclic, "<A-generators> is " + to_string(horo.kind));
  t.note(std::to_string(hyperbolic) + " hyperbolic samples; axis distance " + std::to_string(*focal.axis_distance) +
         " > " + focal.axis_threshold->get_str() + "; horocyclic radius " + std::to_string(horo.orbit_radius.back()));
  return t.result();
}

Result tree_suite() {
  Tally t;
  std::mt19937_64 rng(0x5eed);
  std::size_t balls = 0;
  for (std::uint32_t q : {2u, 3u}) {
    const auto fp = parse_family("lamplighter:" + std::to_string(q));
    const auto& f = dynamic_cast<const LamplighterFamily&>(*fp);
    auto random_vertex = [&]() {
      TreeVertex v;
      v.n = static_cast<std::int64_t>(rng() % 9) - 4;
      std::vector<LampConfig::Entry> e;
      for (std::int64_t p = v.n - 5; p < v.n; ++p) e.emplace_back(p, static_cast<std::uint32_t>(rng() % q));
      v.c = LampConfig::from_entries(e, q);
      return v;
    };
    for (int b = 0; b < 5; ++b) {
      const TreeVertex centre = b == 0 ? TreeVertex{} : random_vertex();
      const unsigned radius = 3 + b % 2;
      const auto ball = bass_serre_ball(f, centre, radius);
      ++balls;
      t.expect(ball.is_tree(), "ball is not a tree");
      const auto d = ball.distances_from(ball.index_of(format_vertex(centre)));
      for (std::size_t v = 0; v < ball.size(); ++v) {
        if (d[v] < static_cast<int>(radius)) t.expect(ball.degree(v) == q + 1, "interior degree != q + 1");
      }
    }
    const auto as = f.window_A(Window{}, 1u << 14);
    for (int s = 0; s < 1000; ++s) {
      const GroupPoint g = evaluate(f, random_word(as, rng() % 10, rng));
      const TreeVertex v = random_vertex();
      t.expect(tree_level(tree_act(f, g, v)) == tree_level(v) - g.m, "equivariance fails");
    }
    for (int s = 0; s < 100; ++s) {
      const TreeVertex v = random_vertex(), w = random_vertex();
      t.expect(tree_act(f, tree_transitivity_witness(f, v, w), v) == w, "transitivity witness fails");
    }
  }
  for (std::uint32_t k : {2u, 3u, 5u}) {
    const auto lamp = parse_family("lamplighter:" + std::to_string(k));
    t.expect(compaction_index(*lamp) == k, "lamplighter index");
    t.expect(windowed_coset_count(*lamp, Window::parse("lo=-2,hi=2")) == k, "lamplighter coset count");
    t.expect(compaction_index(*parse_family("nadic:" + std::to_string(k))) == k, "n-adic index");
  }
  t.note(std::to_string(balls) + " balls regular; 2000 equivariance and 200 transitivity checks");
  return t.result();
}

Result millefeuille_suite() {
  Tally t;
  const auto line = regular_tree_ball(1, 4);
  const auto tree = regular_tree_ball(2, 4);
  const auto m = millefeuille(line, tree);
  t.expect(m.size() == tree.size() && m.edge_count() == tree.edge_count(), "line x T has the wrong size");
  for (std::size_t v = 0; v < m.size(); ++v) {
    const std::string& id = m.id(v);
    const auto comma = id.find(',');
    const auto pv = tree.index_of(id.substr(comma + 1, id.size() - comma - 2));
    t.expect(tree.level(pv) == m.level(v), "projection changes the level");
    for (auto w : m.neighbors(v)) {
      const std::string& wid = m.id(w);
      const auto wc = wid.find(',');
      const auto pw = tree.index_of(wid.substr(wc + 1, wid.size() - wc - 2));
      const auto& nb = tree.neighbors(pv);
      t.expect(std::find(nb.begin(), nb.end(), pw) != nb.end(), "projection is not a graph map");
    }
  }
  for (auto [p, q] : {std::pair{1u, 2u}, std::pair{2u, 2u}, std::pair{2u, 3u}}) {
    const auto mf = millefeuille(regular_tree_ball(p, 3), regular_tree_ball(q, 3));
    const auto d = mf.distances_from(mf.index_of("(u0/,u0/)"));
    for (std::size_t v = 0; v < mf.size(); ++v) {
      if (d[v] < 3) t.expect(mf.degree(v) == p * q + 1, "interior degree != pq + 1");
    }
    const auto delta = four_point_delta(mf.distance_matrix(), {.exhaustive_cutoff = SIZE_MAX}).delta;
    t.expect(delta == HalfInteger::integer(0), "delta != 0");
    t.note("(" + std::to_string(p) + "," + std::to_string(q) + ") n=" + std::to_string(mf.size()));
  }
  return t.result();
}

Result schottky() {
  Tally t;
  const auto f = parse_family("lamplighter:2");
  const auto& lf = dynamic_cast<const LamplighterFamily&>(*f);
  const auto a = alpha_point(*f);
  const auto good = schottky_semigroup_check(*f, a, multiply(*f, a, h_point(lf.lamp(0))), 10);
  t.expect(good.injective && good.accepted, "(alpha, alpha delta_0) rejected");
  t.expect(good.words == 2047, "wrong word count");
  const auto bad = schottky_semigroup_check(*f, h_point(lf.lamp(0)), h_point(lf.lamp(1)), 10);
  t.expect(!bad.accepted, "(delta_0, delta_1) accepted");
  t.note("lambda=" + good.qi.multiplicative_constant.get_str() + " c=" + good.qi.additive_constant.get_str() +
         " over " + std::to_string(good.words) + " words");
  return t.result();
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"delta bound", delta_bound},
      {"oracle equivalence", oracle_equivalence},
      {"normal forms", normal_forms},
      {"distortion inclusion", distortion},
      {"busemann character", busemann},
      {"classification", classification},
      {"tree suite", tree_suite},
      {"millefeuille", millefeuille_suite},
      {"schottky", schottky}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << r.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
