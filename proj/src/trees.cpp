#include "focal/trees.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "csv.hpp"

namespace focal {

// ------------------------------------------------------------ BusemannGraph

std::size_t BusemannGraph::add_vertex(const std::string& id, std::int64_t level) {
  auto [it, fresh] = index_.emplace(id, ids_.size());
  if (!fresh) throw std::invalid_argument("graph: duplicate vertex '" + id + "'");
  ids_.push_back(id);
  levels_.push_back(level);
  adj_.emplace_back();
  return it->second;
}

void BusemannGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= size() || b >= size()) throw std::out_of_range("graph: edge endpoint out of range");
  if (a == b) throw std::invalid_argument("graph: loop at '" + ids_[a] + "'");
  if (std::find(adj_[a].begin(), adj_[a].end(), b) != adj_[a].end()) return;
  adj_[a].push_back(b);
  adj_[b].push_back(a);
}

std::size_t BusemannGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& a : adj_) twice += a.size();
  return twice / 2;
}

std::optional<std::size_t> BusemannGraph::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BusemannGraph::index_of(const std::string& id) const {
  if (auto i = find(id)) return *i;
  throw std::invalid_argument("graph: unknown vertex '" + id + "'");
}

std::vector<int> BusemannGraph::distances_from(std::size_t source) const {
  std::vector<int> dist(size(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (auto w : adj_[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

bool BusemannGraph::is_connected() const {
  if (size() == 0) return false;
  const auto d = distances_from(0);
  return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

void BusemannGraph::validate() const {
  if (size() == 0) throw std::invalid_argument("graph: no vertices");
  for (std::size_t v = 0; v < size(); ++v) {
    for (auto w : adj_[v]) {
      const std::int64_t step = levels_[w] - levels_[v];
      if (step != 1 && step != -1) {
        throw std::invalid_argument("graph: edge " + ids_[v] + " -- " + ids_[w] + " changes the level by " +
                                    std::to_string(step));
      }
    }
  }
  if (!is_connected()) throw std::invalid_argument("graph: not connected");
}

DistanceMatrix BusemannGraph::distance_matrix() const {
  const std::size_t n = size();
  std::vector<std::int32_t> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = distances_from(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (row[j] < 0) throw std::invalid_argument("graph: not connected");
      d[i * n + j] = row[j];
    }
  }
  return DistanceMatrix(ids_, std::move(d));
}

std::string BusemannGraph::to_dot() const {
  std::ostringstream out;
  out << "graph busemann {\n";
  for (std::size_t v = 0; v < size(); ++v) out << "  \"" << ids_[v] << "\" [level=" << levels_[v] << "];\n";
  for (std::size_t v = 0; v < size(); ++v) {
    for (auto w : adj_[v]) {
      if (v < w) out << "  \"" << ids_[v] << "\" -- \"" << ids_[w] << "\";\n";
    }
  }
  out << "}\n";
  return out.str();
}

std::string BusemannGraph::to_csv() const {
  std::ostringstream out;
  csv::write_row(out, {"id", "level", "neighbors"});
  for (std::size_t v = 0; v < size(); ++v) {
    std::string nb;
    for (auto w : adj_[v]) {
      if (!nb.empty()) nb += ';';
      nb += ids_[w];
    }
    csv::write_row(out, {ids_[v], std::to_string(levels_[v]), nb});
  }
  return out.str();
}

// --------------------------------------------------------- Regular tree ball

BusemannGraph regular_tree_ball(unsigned k, unsigned levels) {
  if (k < 1) throw std::invalid_argument("regular_tree_ball: k must be >= 1");
  if (k > 36) throw std::invalid_argument("regular_tree_ball: k must be <= 36");
  static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
  // Vertex "u{u}/{digits}": go up u steps from the root, then down along
  // digits. Digit 0 below an ancestor is the step back towards the root, so
  // it is excluded as a first digit when u > 0.
  BusemannGraph g;
  std::vector<std::size_t> ancestors;
  for (unsigned u = 0; u <= levels; ++u) {
    ancestors.push_back(g.add_vertex("u" + std::to_string(u) + "/", u));
    if (u > 0) g.add_edge(ancestors[u], ancestors[u - 1]);
    std::vector<std::pair<std::string, std::size_t>> frontier{{"", ancestors[u]}};
    for (unsigned t = 1; u + t <= levels; ++t) {
      std::vector<std::pair<std::string, std::size_t>> next;
      for (const auto& [digits, parent] : frontier) {
        for (unsigned d = (t == 1 && u > 0) ? 1 : 0; d < k; ++d) {
          std::string path = digits + kDigits[d];
          const std::size_t v = g.add_vertex("u" + std::to_string(u) + "/" + path,
                                             static_cast<std::int64_t>(u) - static_cast<std::int64_t>(t));
          g.add_edge(parent, v);
          next.emplace_back(std::move(path), v);
        }
      }
      frontier = std::move(next);
    }
  }
  return g;
}

// ------------------------------------------------------------- Bass-Serre tree

std::string format_vertex(const TreeVertex& v) {
  std::string out = std::to_string(v.n) + "|[";
  bool first = true;
  for (const auto& [pos, val] : v.c.entries()) {
    if (!first) out += ';';
    first = false;
    out += std::to_string(pos) + ":" + std::to_string(val);
  }
  return out + "]";
}

const LamplighterFamily& require_lamplighter(const Family& f) {
  if (const auto* l = dynamic_cast<const LamplighterFamily*>(&f)) return *l;
  throw UnsupportedOperation("Bass-Serre tree: family '" + f.name() + "' is not a lamplighter family");
}

TreeVertex tree_parent(const TreeVertex& v) { return {v.n - 1, v.c.below(v.n - 1)}; }

std::vector<TreeVertex> tree_children(const LamplighterFamily& f, const TreeVertex& v) {
  std::vector<TreeVertex> out;
  out.reserve(f.q());
  for (std::uint32_t val = 0; val < f.q(); ++val) {
    out.push_back({v.n + 1, v.c.plus(LampConfig::single(v.n, val, f.q()), f.q())});
  }
  return out;
}

std::int64_t tree_distance(const TreeVertex& v, const TreeVertex& w) {
  std::int64_t common = std::min(v.n, w.n);
  const auto& a = v.c.entries();
  const auto& b = w.c.entries();
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  std::optional<std::int64_t> differ;
  if (i < a.size() && i < b.size()) {
    differ = std::min(a[i].first, b[i].first);
  } else if (i < a.size()) {
    differ = a[i].first;
  } else if (i < b.size()) {
    differ = b[i].first;
  }
  if (differ) common = std::min(common, *differ);
  return (v.n - common) + (w.n - common);
}

TreeVertex tree_act(const Family& f, const GroupPoint& g, const TreeVertex& v) {
  const auto& lf = require_lamplighter(f);
  const std::int64_t level = v.n + g.m;
  const LampConfig moved = LamplighterFamily::lamps(g.h).plus(v.c.shifted(g.m), lf.q());
  return {level, moved.below(level)};
}

GroupPoint tree_transitivity_witness(const Family& f, const TreeVertex& v, const TreeVertex& w) {
  const auto& lf = require_lamplighter(f);
  const std::int64_t m = w.n - v.n;
  const LampConfig h = w.c.plus(v.c.shifted(m).negated(lf.q()), lf.q());
  return {HElement{h}, m};
}

BusemannGraph bass_serre_ball(const Family& f, const TreeVertex& center, unsigned radius) {
  const auto& lf = require_lamplighter(f);
  BusemannGraph g;
  std::map<std::string, std::size_t> index;
  auto add = [&](const TreeVertex& v) {
    const std::string id = format_vertex(v);
    auto it = index.find(id);
    if (it != index.end()) return it->second;
    const std::size_t i = g.add_vertex(id, tree_level(v));
    index.emplace(id, i);
    return i;
  };
  std::deque<std::pair<TreeVertex, unsigned>> queue{{center, 0}};
  add(center);
  while (!queue.empty()) {
    auto [v, d] = queue.front();
    queue.pop_front();
    if (d == radius) continue;
    const std::size_t vi = index.at(format_vertex(v));
    std::vector<TreeVertex> nbrs = tree_children(lf, v);
    nbrs.push_back(tree_parent(v));
    for (auto& w : nbrs) {
      const bool fresh = !index.contains(format_vertex(w));
      const std::size_t wi = add(w);
      g.add_edge(vi, wi);
      if (fresh) queue.emplace_back(std::move(w), d + 1);
    }
  }
  return g;
}

QIReport tree_qi_probe(const Family& f, const std::vector<GroupPoint>& samples) {
  require_lamplighter(f);
  const TreeVertex v0;
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  pairs.reserve(samples.size());
  for (const auto& g : samples) pairs.emplace_back(word_length(f, g), tree_distance(v0, tree_act(f, g, v0)));
  return qi_embedding_check(pairs);
}

// --------------------------------------------------------------- Millefeuille

BusemannGraph millefeuille(const BusemannGraph& X, const BusemannGraph& T) {
  X.validate();
  T.validate();
  std::map<std::int64_t, std::vector<std::size_t>> t_by_level;
  for (std::size_t y = 0; y < T.size(); ++y) t_by_level[T.level(y)].push_back(y);

  BusemannGraph out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  for (std::size_t x = 0; x < X.size(); ++x) {
    auto it = t_by_level.find(X.level(x));
    if (it == t_by_level.end()) continue;
    for (auto y : it->second) {
      index.emplace(std::make_pair(x, y), out.add_vertex("(" + X.id(x) + "," + T.id(y) + ")", X.level(x)));
    }
  }
  if (out.size() == 0) throw std::invalid_argument("millefeuille: empty fiber (level ranges are disjoint)");
  for (const auto& [xy, v] : index) {
    const auto [x, y] = xy;
    for (auto x2 : X.neighbors(x)) {
      if (X.level(x2) < X.level(x)) continue;  // each edge once, from its lower end
      for (auto y2 : T.neighbors(y)) {
        if (T.level(y2) - T.level(y) != X.level(x2) - X.level(x)) continue;
        out.add_edge(v, index.at({x2, y2}));
      }
    }
  }
  return out;
}

}  // namespace focal
