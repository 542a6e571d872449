#pragma once

// Busemann-labelled graphs: regular tree balls, the Bass-Serre tree of the
// lamplighter groups with its G-action, and millefeuille fiber products.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "focal/word_metric.hpp"

namespace focal {

/// Finite graph with an integer level on each vertex.
class BusemannGraph {
 public:
  std::size_t add_vertex(const std::string& id, std::int64_t level);
  void add_edge(std::size_t a, std::size_t b);

  std::size_t size() const { return ids_.size(); }
  std::size_t edge_count() const;
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  std::int64_t level(std::size_t i) const { return levels_.at(i); }
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adj_.at(i); }
  std::size_t degree(std::size_t i) const { return adj_.at(i).size(); }
  std::optional<std::size_t> find(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;

  /// Throws std::invalid_argument unless every edge changes the level by
  /// exactly one and the graph is connected and nonempty.
  void validate() const;
  bool is_connected() const;
  bool is_tree() const { return is_connected() && edge_count() + 1 == size(); }

  /// All-pairs graph distances (breadth-first from every vertex).
  DistanceMatrix distance_matrix() const;
  std::vector<int> distances_from(std::size_t source) const;

  std::string to_dot() const;
  /// Rows "id,level,neighbor;neighbor;...".
  std::string to_csv() const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::int64_t> levels_;
  std::vector<std::vector<std::size_t>> adj_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Ball of radius `levels` around a root of the (k+1)-regular tree. Each
/// vertex has one neighbour one level up (towards the chosen end) and k one
/// level down; the root sits at level 0.
BusemannGraph regular_tree_ball(unsigned k, unsigned levels);

/// Bass-Serre vertex (n, c) with c supported on positions < n. The parent is
/// (n-1, c restricted to < n-1); the q children add v * delta_n.
struct TreeVertex {
  std::int64_t n = 0;
  LampConfig c;

  bool operator==(const TreeVertex&) const = default;
};

std::string format_vertex(const TreeVertex& v);
/// b'(n, c) = -n.
inline std::int64_t tree_level(const TreeVertex& v) { return -v.n; }

const LamplighterFamily& require_lamplighter(const Family& f);

TreeVertex tree_parent(const TreeVertex& v);
std::vector<TreeVertex> tree_children(const LamplighterFamily& f, const TreeVertex& v);
std::int64_t tree_distance(const TreeVertex& v, const TreeVertex& w);

/// (h, m) . (n, c) = (n + m, (h + shift_m c) restricted to < n + m).
/// Throws UnsupportedOperation for non-lamplighter families.
TreeVertex tree_act(const Family& f, const GroupPoint& g, const TreeVertex& v);

/// g with tree_act(g, v) = w.
GroupPoint tree_transitivity_witness(const Family& f, const TreeVertex& v, const TreeVertex& w);

/// Ball of the given radius around v in the Bass-Serre tree, levels b'.
BusemannGraph bass_serre_ball(const Family& f, const TreeVertex& center, unsigned radius);

/// Samples (d_S(1, g), d_T(v0, g v0)) with v0 = (0, empty).
QIReport tree_qi_probe(const Family& f, const std::vector<GroupPoint>& samples);

/// {(x, y) : b(x) = b'(y)} with an edge when both coordinates move along an
/// edge in the same direction. Levels are b(x). Throws std::invalid_argument
/// on an empty fiber.
BusemannGraph millefeuille(const BusemannGraph& X, const BusemannGraph& T);

}  // namespace focal
