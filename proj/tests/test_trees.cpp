#include <deque>
#include <map>
#include <random>

#include "doctest.h"
#include "focal/trees.hpp"

using namespace focal;

namespace {

std::size_t regular_ball_size(std::size_t k, unsigned radius) {
  // 1 + (k + 1)(1 + k + ... + k^(radius - 1))
  std::size_t shell = 0, power = 1;
  for (unsigned j = 0; j < radius; ++j) {
    shell += power;
    power *= k;
  }
  return 1 + (k + 1) * shell;
}

// Vertices of the Bass-Serre ball listed by walking parent and child maps.
std::map<std::string, TreeVertex> walk(const LamplighterFamily& f, const TreeVertex& center, unsigned radius) {
  std::map<std::string, TreeVertex> seen{{format_vertex(center), center}};
  std::deque<std::pair<TreeVertex, unsigned>> queue{{center, 0}};
  while (!queue.empty()) {
    auto [v, d] = queue.front();
    queue.pop_front();
    if (d == radius) continue;
    auto next = tree_children(f, v);
    next.push_back(tree_parent(v));
    for (auto& w : next) {
      if (seen.emplace(format_vertex(w), w).second) queue.emplace_back(w, d + 1);
    }
  }
  return seen;
}

TreeVertex random_vertex(std::uint32_t q, std::mt19937_64& rng) {
  TreeVertex v;
  v.n = static_cast<std::int64_t>(rng() % 7) - 3;
  std::vector<LampConfig::Entry> e;
  for (std::int64_t p = v.n - 4; p < v.n; ++p) e.emplace_back(p, static_cast<std::uint32_t>(rng() % q));
  v.c = LampConfig::from_entries(e, q);
  return v;
}

GroupPoint random_element(const Family& f, std::mt19937_64& rng) {
  const auto as = f.window_A(Window::parse("lo=-2,hi=3"), 4096);
  return evaluate(f, random_word(as, rng() % 9, rng));
}

}  // namespace

TEST_CASE("regular tree balls") {
  const auto line = regular_tree_ball(1, 3);
  line.validate();
  CHECK(line.size() == 7);
  CHECK(line.is_tree());
  std::size_t interior = 0;
  for (std::size_t v = 0; v < line.size(); ++v) {
    if (line.degree(v) > 1) {
      CHECK(line.degree(v) == 2);
      ++interior;
    }
  }
  CHECK(interior == 5);

  const auto t = regular_tree_ball(2, 4);
  t.validate();
  CHECK(t.is_tree());
  CHECK(t.size() == regular_ball_size(2, 4));
  const auto root = t.index_of("u0/");
  const auto dist = t.distances_from(root);
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (dist[v] < 4) CHECK(t.degree(v) == 3);
  }
  CHECK(four_point_delta(t.distance_matrix()).delta == HalfInteger::integer(0));

  const auto point = regular_tree_ball(3, 0);
  CHECK(point.size() == 1);
  CHECK_THROWS_AS(regular_tree_ball(0, 2), std::invalid_argument);
  CHECK(t.to_csv().rfind("id,level,neighbors", 0) == 0);
  CHECK(t.to_dot().find("level=") != std::string::npos);
}

TEST_CASE("graph validation") {
  BusemannGraph g;
  const auto a = g.add_vertex("a", 0), b = g.add_vertex("b", 2);
  g.add_edge(a, b);
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  BusemannGraph h;
  h.add_vertex("a", 0);
  h.add_vertex("b", 1);
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
  CHECK_THROWS_AS(h.add_vertex("a", 3), std::invalid_argument);
  CHECK_THROWS_AS(BusemannGraph().validate(), std::invalid_argument);
}

TEST_CASE("bass-serre tree structure") {
  for (std::uint32_t q : {2u, 3u}) {
    const auto fp = parse_family("lamplighter:" + std::to_string(q));
    const auto& f = dynamic_cast<const LamplighterFamily&>(*fp);
    const TreeVertex v0;
    CHECK(tree_act(f, alpha_point(f), v0) == TreeVertex{1, {}});

    std::mt19937_64 rng(q);
    for (int t = 0; t < 50; ++t) {
      const auto v = random_vertex(q, rng);
      const auto kids = tree_children(f, v);
      CHECK(kids.size() == q);
      for (const auto& c : kids) {
        CHECK(tree_parent(c) == v);
        CHECK(tree_level(c) == tree_level(v) - 1);
        CHECK(tree_distance(c, v) == 1);
      }
    }

    const auto ball = bass_serre_ball(f, v0, 3);
    ball.validate();
    CHECK(ball.is_tree());
    CHECK(ball.size() == regular_ball_size(q, 3));
    const auto listed = walk(f, v0, 3);
    CHECK(listed.size() == ball.size());
    const auto d = ball.distance_matrix();
    for (const auto& [id1, v1] : listed) {
      for (const auto& [id2, v2] : listed) {
        CHECK(tree_distance(v1, v2) == d(d.index_of(id1), d.index_of(id2)));
      }
    }
    for (std::size_t i = 0; i < ball.size(); ++i) {
      if (ball.distances_from(ball.index_of(format_vertex(v0)))[i] < 3) CHECK(ball.degree(i) == q + 1);
    }
    CHECK(four_point_delta(d).delta == HalfInteger::integer(0));
  }
}

TEST_CASE("action is an equivariant homomorphism") {
  const auto fp = parse_family("lamplighter:2");
  const auto& f = dynamic_cast<const LamplighterFamily&>(*fp);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const auto g = random_element(f, rng), g2 = random_element(f, rng);
    const auto v = random_vertex(2, rng), w = random_vertex(2, rng);
    const auto gv = tree_act(f, g, v);
    CHECK(tree_level(gv) - tree_level(v) == -g.m);
    CHECK(tree_act(f, multiply(f, g, g2), v) == tree_act(f, g, tree_act(f, g2, v)));
    CHECK(tree_act(f, g, tree_parent(v)) == tree_parent(gv));
    CHECK(tree_distance(gv, tree_act(f, g, w)) == tree_distance(v, w));
    CHECK(tree_act(f, identity_point(f), v) == v);
  }
}

TEST_CASE("transitivity witnesses") {
  const auto fp = parse_family("lamplighter:3");
  const auto& f = dynamic_cast<const LamplighterFamily&>(*fp);
  const TreeVertex v0;
  CHECK(tree_transitivity_witness(f, v0, v0) == identity_point(f));
  const TreeVertex w{2, LampConfig::from_entries({{0, 1}, {1, 2}}, 3)};
  const auto g = tree_transitivity_witness(f, v0, w);
  CHECK(g.m == 2);
  CHECK(tree_act(f, g, v0) == w);

  std::mt19937_64 rng(22);
  for (int t = 0; t < 50; ++t) {
    // edge transport: (v, child) to (w, child')
    const auto v = random_vertex(3, rng), u = random_vertex(3, rng);
    const auto vc = tree_children(f, v)[rng() % 3];
    const auto uc = tree_children(f, u)[rng() % 3];
    const auto h = tree_transitivity_witness(f, vc, uc);
    CHECK(tree_act(f, h, vc) == uc);
    CHECK(tree_act(f, h, v) == u);
  }

  // level sets are single orbits of the level-preserving subgroup
  const auto ball = walk(f, v0, 4);
  for (const auto& [i1, a] : ball) {
    for (const auto& [i2, b] : ball) {
      if (a.n != b.n) continue;
      const auto k = tree_transitivity_witness(f, a, b);
      CHECK(k.m == 0);
      CHECK(tree_act(f, k, a) == b);
    }
  }
}

TEST_CASE("orbit map is a quasi-isometry") {
  const auto fp = parse_family("lamplighter:2");
  const auto& f = dynamic_cast<const LamplighterFamily&>(*fp);
  const TreeVertex v0;
  for (int n = -6; n <= 6; ++n) {
    CHECK(tree_distance(v0, tree_act(f, alpha_point(f, n), v0)) == std::abs(n));
    CHECK(word_length(f, alpha_point(f, n)) == std::abs(n));
  }
  for (const auto& a : f.window_A(Window::parse("lo=0,hi=4"), 4096)) {
    CHECK(tree_distance(v0, tree_act(f, h_point(a), v0)) <= 2);
  }
  BallOptions opts;
  opts.window = Window::parse("lo=-5,hi=5");
  opts.samples = 400;
  const auto r4 = tree_qi_probe(f, ball_points(f, 4, opts).points);
  const auto r8 = tree_qi_probe(f, ball_points(f, 8, opts).points);
  CHECK(r4.horizon == 4);
  CHECK(r8.horizon == 8);
  CHECK(r8.multiplicative_constant + r8.additive_constant <= 8);
  CHECK(r8.multiplicative_constant == r4.multiplicative_constant);
  CHECK(r8.additive_constant <= r4.additive_constant + 1);
  CHECK_THROWS_AS(tree_qi_probe(*parse_family("nadic:2"), {}), UnsupportedOperation);
  CHECK_THROWS_AS(tree_act(*parse_family("nadic:2"), alpha_point(f), v0), UnsupportedOperation);
}

TEST_CASE("millefeuille") {
  const auto line = regular_tree_ball(1, 4);
  const auto t = regular_tree_ball(2, 4);
  const auto m = millefeuille(line, t);
  m.validate();
  CHECK(m.size() == t.size());
  CHECK(m.edge_count() == t.edge_count());
  // projection to the second factor is a graph isomorphism
  std::map<std::size_t, std::size_t> proj;
  for (std::size_t v = 0; v < m.size(); ++v) {
    const std::string& id = m.id(v);
    const auto comma = id.find(',');
    proj[v] = t.index_of(id.substr(comma + 1, id.size() - comma - 2));
  }
  for (std::size_t v = 0; v < m.size(); ++v) {
    for (auto w : m.neighbors(v)) {
      const auto& nb = t.neighbors(proj[v]);
      CHECK(std::find(nb.begin(), nb.end(), proj[w]) != nb.end());
    }
  }

  for (auto [p, q] : {std::pair{1u, 2u}, std::pair{2u, 2u}, std::pair{2u, 3u}}) {
    CAPTURE(p);
    CAPTURE(q);
    const auto x = regular_tree_ball(p, 3), y = regular_tree_ball(q, 3);
    const auto mf = millefeuille(x, y);
    mf.validate();
    CHECK(mf.is_tree());
    const auto centre = mf.index_of("(u0/,u0/)");
    const auto d = mf.distances_from(centre);
    for (std::size_t v = 0; v < mf.size(); ++v) {
      if (d[v] < 3) CHECK(mf.degree(v) == p * q + 1);
    }
    CHECK(four_point_delta(mf.distance_matrix()).delta == HalfInteger::integer(0));
  }

  BusemannGraph low, high;
  low.add_vertex("a", 0);
  high.add_vertex("b", 5);
  CHECK_THROWS_AS(millefeuille(low, high), std::invalid_argument);
}
