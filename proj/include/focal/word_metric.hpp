#pragma once

// The word metric on G = H x|_alpha Z with generators A and alpha^{+-1}.
//
// Composition: (h,m)(h',m') = (h * alpha^m(h'), m + m'), so that
// alpha h alpha^-1 = alpha(h).

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "focal/confined.hpp"
#include "focal/metric.hpp"

namespace focal {

struct GroupPoint {
  HElement h;
  std::int64_t m = 0;

  bool operator==(const GroupPoint&) const = default;
};

GroupPoint identity_point(const Family& f);
GroupPoint alpha_point(const Family& f, std::int64_t k = 1);
inline GroupPoint h_point(HElement h) { return {std::move(h), 0}; }

GroupPoint multiply(const Family& f, const GroupPoint& x, const GroupPoint& y);
GroupPoint inverse(const Family& f, const GroupPoint& x);
GroupPoint power(const Family& f, const GroupPoint& x, std::int64_t n);

/// Injective key: canonical bytes of h and the exponent.
std::string point_key(const Family& f, const GroupPoint& x);
/// "h@m", e.g. "[0:1]@-2" or "5/2@1".
std::string format_point(const Family& f, const GroupPoint& x);
/// Element JSON with an added "m" field.
nlohmann::json point_to_json(const Family& f, const GroupPoint& x);
GroupPoint point_from_json(const Family& f, const nlohmann::json& j);

struct Letter {
  enum class Kind { AlphaPlus, AlphaMinus, Gen };
  Kind kind = Kind::AlphaPlus;
  HElement g;

  static Letter alpha_plus() { return {Kind::AlphaPlus, {}}; }
  static Letter alpha_minus() { return {Kind::AlphaMinus, {}}; }
  static Letter gen(HElement a) { return {Kind::Gen, std::move(a)}; }
};

using Word = std::vector<Letter>;

/// Left-to-right product. Throws std::invalid_argument if a Gen letter is
/// not in A.
GroupPoint evaluate(const Family& f, const Word& w);

/// Parses "a+ a- g{lamps:{0:1}}": whitespace-separated a+, a- and g{literal}.
Word parse_word(const Family& f, std::string_view text);
std::string format_word(const Family& f, const Word& w);

/// alpha^-i g_1 ... g_k alpha^j.
struct NormalForm {
  std::uint64_t i = 0;
  std::vector<HElement> gs;
  std::uint64_t j = 0;

  std::uint64_t length() const { return i + gs.size() + j; }
  std::size_t k() const { return gs.size(); }
  Word to_word() const;
};

/// Pushes every alpha^- to the left and every alpha^+ to the right,
/// conjugating the A-letters they cross. Never lengthens the word.
NormalForm rewrite_to_normal_form(const Family& f, const Word& w);

/// ceil(4 log2(n0 + 2)).
unsigned k0_bound(unsigned n0);

/// Exact test of delta <= 16 log2(n0 + 2), i.e. 2^(2 delta) <= (n0 + 2)^32.
bool delta_bound_holds(HalfInteger delta, unsigned n0);
/// 16 log2(n0 + 2) in floating point, for display only.
double delta_bound_value(unsigned n0);

class UncheckedFamily : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact d_S(1, x) = min over i >= max(0,-m) of 2i + m + l_A(alpha^i h).
/// Throws UncheckedFamily when the family's A-length is unvalidated and
/// `unchecked` is false.
std::int64_t word_length(const Family& f, const GroupPoint& x, bool unchecked = false);
inline std::int64_t distance(const Family& f, const GroupPoint& x, const GroupPoint& y,
                             bool unchecked = false) {
  return word_length(f, multiply(f, inverse(f, x), y), unchecked);
}

/// Geodesic normal form of x: alpha^-i, then an A-factorization of
/// alpha^i(h), then alpha^(m+i). Uses the largest minimizing i.
NormalForm geodesic_normal_form(const Family& f, const GroupPoint& x, bool unchecked = false);
inline Word geodesic_witness(const Family& f, const GroupPoint& x, bool unchecked = false) {
  return geodesic_normal_form(f, x, unchecked).to_word();
}

/// Breadth-first distances from the identity in the Cayley graph induced on
/// {(h, m) : h in the window, |m| <= radius}. An element is trusted when its
/// distance is unchanged in the enlarged window.
struct BfsOracle {
  Window window;
  int radius = 0;
  std::vector<GroupPoint> points;
  std::vector<int> distance;
  std::vector<bool> trusted;
  /// True when the window hit the enumeration limit.
  bool truncated = false;

  std::size_t trusted_count() const;
  nlohmann::json to_json(const Family& f) const;
};

BfsOracle bfs_oracle(const Family& f, const Window& window, int radius,
                     std::size_t limit = 1u << 12);

struct BallOptions {
  Window window;
  /// 0 means every windowed element of the ball; otherwise a seeded sample
  /// of this many points.
  std::size_t samples = 0;
  std::uint64_t seed = 0x5eed;
  bool unchecked = false;
};

struct Ball {
  int radius = 0;
  bool exhaustive = true;
  BallOptions options;
  std::vector<GroupPoint> points;
  /// Pairwise d(x, y) = word_length(x^-1 y); ids are format_point strings.
  DistanceMatrix distances;

  /// Distance-one pairs.
  std::string to_dot() const;
};

Ball ball_points(const Family& f, int radius, const BallOptions& options = {});

struct DistortionLevel {
  unsigned m = 0;
  std::int64_t bound = 0;
  std::size_t products = 0;
  std::int64_t max_length = 0;
  std::size_t violations = 0;
  std::optional<std::string> counterexample;
};

struct DistortionReport {
  bool pass = true;
  bool exhaustive = true;
  Window window;
  std::uint64_t seed = 0;
  std::vector<DistortionLevel> levels;

  nlohmann::json to_json() const;
};

/// Checks word_length(p) <= 2 n0 m + 1 for products p of 2^m windowed
/// A-elements, m = 0..m_max. With random_products == 0 the product sets are
/// enumerated exhaustively (up to `limit` elements per level); otherwise that
/// many seeded random products are drawn per level.
DistortionReport distortion_check(const Family& f, unsigned m_max, const Window& window,
                                  std::size_t random_products = 0, std::uint64_t seed = 0x5eed,
                                  std::size_t limit = 1u << 16);

/// Uniform random word of the given length over {a+, a-, g{windowed A}}.
Word random_word(const std::vector<HElement>& windowed_A, std::size_t length,
                 std::mt19937_64& rng);

}  // namespace focal
