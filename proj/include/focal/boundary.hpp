#pragma once

// Boundary invariants from the exact distance oracle: translation numbers,
// isometry types, horokernels at the fixed end, the Busemann character,
// action types and Schottky pairs.
//
// The fixed end is xi = lim alpha^-n, and h(x, y) = d(y, x_n) - d(x, x_n)
// with x_n = alpha^-n, so that beta(alpha) = 1 and beta(h, m) = m.

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "focal/word_metric.hpp"

namespace focal {

struct TranslationNumber {
  /// d(1, g^N) / N.
  mpq_class estimate;
  /// min over n <= N of d(1, g^n) / n.
  mpq_class upper_bound;
  /// |m(g)| whenever the family's length function is validated.
  std::optional<mpq_class> exact_value;
  std::int64_t horizon = 0;

  bool exact() const { return exact_value.has_value(); }
  nlohmann::json to_json() const;
};

TranslationNumber translation_number(const Family& f, const GroupPoint& g, std::int64_t N);

enum class IsometryKind { Elliptic, Parabolic, Hyperbolic };
std::string to_string(IsometryKind k);

struct IsometryType {
  IsometryKind kind = IsometryKind::Elliptic;
  std::int64_t evidence_horizon = 0;
  bool exact = false;
  std::string witness;

  nlohmann::json to_json() const;
};

/// Hyperbolic when m(g) != 0; Elliptic with a torsion period; Parabolic with
/// a family growth certificate. Anything else is read off the orbit lengths
/// up to N and tagged inexact.
IsometryType isometry_type(const Family& f, const GroupPoint& g, std::int64_t N);

class StabilizationError : public std::runtime_error {
 public:
  StabilizationError(const std::string& what, std::vector<std::int64_t> trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<std::int64_t>& trace() const { return trace_; }

 private:
  std::vector<std::int64_t> trace_;
};

struct HorokernelOptions {
  /// Largest n tried for x_n = alpha^-n.
  std::int64_t max_horizon = 4096;
  /// Number of equal trailing values required.
  std::int64_t stable_run = 4;
};

/// d(y, alpha^-n) - d(x, alpha^-n) once constant over a trailing run of n.
/// Throws StabilizationError with the sequence when it never settles.
std::int64_t horokernel(const Family& f, const GroupPoint& x, const GroupPoint& y,
                        const HorokernelOptions& options = {});

struct QuasicharacterEstimate {
  /// Exact beta(g) = m(g) * beta(alpha), beta(alpha) = 1.
  mpq_class value;
  /// Plain average h(1, g^N) / N.
  mpq_class estimate;
  /// Homogeneity defect of the exact value (0 for registered families).
  mpq_class defect_bound;
  /// h(1, g) and |beta(g) - h(1, g)|.
  std::int64_t horokernel_value = 0;
  mpq_class horokernel_gap;
  std::int64_t horizon = 0;
  bool exact = true;

  nlohmann::json to_json() const;
};

QuasicharacterEstimate busemann_quasicharacter(const Family& f, const GroupPoint& g, std::int64_t N,
                                               const HorokernelOptions& options = {});

enum class ActionKind { Bounded, Horocyclic, Lineal, Focal, GeneralType };
std::string to_string(ActionKind k);

struct ActionTypeReport {
  ActionKind kind = ActionKind::Bounded;
  std::int64_t horizon = 0;
  bool low_confidence = false;
  /// R(l): largest word length of an orbit point reached by a word of length <= l.
  std::vector<std::int64_t> orbit_radius;
  /// Largest distance from an orbit point to the axis {alpha^n}.
  std::optional<std::int64_t> axis_distance;
  std::optional<mpq_class> axis_threshold;
  std::vector<std::string> witnesses;

  nlohmann::json to_json() const;
};

struct ActionTypeOptions {
  /// Hyperbolicity constant used for the axis neighbourhood 2 delta + max |s|.
  mpq_class delta = 1;
  /// Generators at horizon l; when unset the fixed list is used at every l.
  std::function<std::vector<GroupPoint>(std::int64_t)> generators_at;
  std::size_t max_points = 1u << 16;
};

/// Classifies the action of <generators> on the Cayley graph from the words
/// of length <= L in the generators and their inverses. GeneralType is never
/// returned: the ambient group fixes xi.
ActionTypeReport action_type(const Family& f, const std::vector<GroupPoint>& generators, std::int64_t L,
                             const ActionTypeOptions& options = {});

struct SchottkyReport {
  /// Pairwise (prefix-tree distance, d(eval u, eval v)) over positive words.
  QIReport qi;
  bool injective = true;
  std::size_t words = 0;
  std::optional<std::pair<std::string, std::string>> collision;
  bool accepted = false;

  nlohmann::json to_json() const;
};

/// Evaluates every positive word in {a, b} of length <= L.
SchottkyReport schottky_semigroup_check(const Family& f, const GroupPoint& a, const GroupPoint& b,
                                        unsigned L);

}  // namespace focal
