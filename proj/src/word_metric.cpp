#include "focal/word_metric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace focal {

GroupPoint identity_point(const Family& f) { return {f.identity(), 0}; }

GroupPoint alpha_point(const Family& f, std::int64_t k) { return {f.identity(), k}; }

GroupPoint multiply(const Family& f, const GroupPoint& x, const GroupPoint& y) {
  return {f.multiply(x.h, f.alpha_pow(y.h, x.m)), x.m + y.m};
}

GroupPoint inverse(const Family& f, const GroupPoint& x) {
  return {f.alpha_pow(f.invert(x.h), -x.m), -x.m};
}

GroupPoint power(const Family& f, const GroupPoint& x, std::int64_t n) {
  GroupPoint base = n < 0 ? inverse(f, x) : x;
  std::uint64_t e = n < 0 ? static_cast<std::uint64_t>(-n) : static_cast<std::uint64_t>(n);
  GroupPoint acc = identity_point(f);
  while (e) {
    if (e & 1) acc = multiply(f, acc, base);
    e >>= 1;
    if (e) base = multiply(f, base, base);
  }
  return acc;
}

std::string point_key(const Family& f, const GroupPoint& x) {
  return f.canonical_bytes(x.h) + "@" + std::to_string(x.m);
}

std::string format_point(const Family& f, const GroupPoint& x) {
  return f.format(x.h) + "@" + std::to_string(x.m);
}

nlohmann::json point_to_json(const Family& f, const GroupPoint& x) {
  nlohmann::json j = f.to_json(x.h);
  j["m"] = x.m;
  return j;
}

GroupPoint point_from_json(const Family& f, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("group point: expected a JSON object");
  nlohmann::json rest = j;
  std::int64_t m = 0;
  if (rest.contains("m")) {
    if (!rest["m"].is_number_integer()) throw std::invalid_argument("group point: non-integer m");
    m = rest["m"].get<std::int64_t>();
    rest.erase("m");
  }
  return {f.from_json(rest), m};
}

// --------------------------------------------------------------------- Words

GroupPoint evaluate(const Family& f, const Word& w) {
  GroupPoint x = identity_point(f);
  for (const auto& letter : w) {
    switch (letter.kind) {
      case Letter::Kind::AlphaPlus:
        x.m += 1;
        break;
      case Letter::Kind::AlphaMinus:
        x.m -= 1;
        break;
      case Letter::Kind::Gen:
        if (!f.in_A(letter.g)) {
          throw std::invalid_argument("word letter g{" + f.format(letter.g) + "} is not in A");
        }
        x = multiply(f, x, h_point(letter.g));
        break;
    }
  }
  return x;
}

Word parse_word(const Family& f, std::string_view text) {
  Word w;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    const std::string_view rest = text.substr(pos);
    if (rest.starts_with("a+")) {
      w.push_back(Letter::alpha_plus());
      pos += 2;
    } else if (rest.starts_with("a-")) {
      w.push_back(Letter::alpha_minus());
      pos += 2;
    } else if (rest.starts_with("g{")) {
      std::size_t end = 1;
      int depth = 0;
      for (; end < rest.size(); ++end) {
        if (rest[end] == '{') ++depth;
        if (rest[end] == '}' && --depth == 0) break;
      }
      if (end >= rest.size()) throw std::invalid_argument("word: unterminated g{ at offset " + std::to_string(pos));
      HElement a = f.parse_literal(rest.substr(2, end - 2));
      if (!f.in_A(a)) throw std::invalid_argument("word: letter g{" + f.format(a) + "} is not in A");
      w.push_back(Letter::gen(std::move(a)));
      pos += end + 1;
    } else {
      throw std::invalid_argument("word: unexpected token at offset " + std::to_string(pos) + ": '" +
                                  std::string(rest.substr(0, 8)) + "'");
    }
  }
  return w;
}

std::string format_word(const Family& f, const Word& w) {
  std::string out;
  for (const auto& letter : w) {
    if (!out.empty()) out += ' ';
    switch (letter.kind) {
      case Letter::Kind::AlphaPlus:
        out += "a+";
        break;
      case Letter::Kind::AlphaMinus:
        out += "a-";
        break;
      case Letter::Kind::Gen:
        out += "g{" + f.format(letter.g) + "}";
        break;
    }
  }
  return out;
}

Word NormalForm::to_word() const {
  Word w;
  w.reserve(length());
  for (std::uint64_t s = 0; s < i; ++s) w.push_back(Letter::alpha_minus());
  for (const auto& g : gs) w.push_back(Letter::gen(g));
  for (std::uint64_t s = 0; s < j; ++s) w.push_back(Letter::alpha_plus());
  return w;
}

NormalForm rewrite_to_normal_form(const Family& f, const Word& w) {
  NormalForm nf;
  for (const auto& letter : w) {
    switch (letter.kind) {
      case Letter::Kind::AlphaPlus:
        ++nf.j;
        break;
      case Letter::Kind::AlphaMinus:
        if (nf.j > 0) {
          --nf.j;
        } else {
          for (auto& g : nf.gs) g = f.alpha(g);
          ++nf.i;
        }
        break;
      case Letter::Kind::Gen: {
        if (!f.in_A(letter.g)) {
          throw std::invalid_argument("word letter g{" + f.format(letter.g) + "} is not in A");
        }
        HElement g = f.alpha_pow(letter.g, static_cast<std::int64_t>(nf.j));
        if (!f.is_identity(g)) nf.gs.push_back(std::move(g));
        break;
      }
    }
  }
  return nf;
}

unsigned k0_bound(unsigned n0) {
  // ceil(4 log2(n0 + 2)) without floating point: least k with 2^k >= (n0+2)^4.
  const BigInt target = BigInt(n0 + 2) * (n0 + 2) * (n0 + 2) * (n0 + 2);
  unsigned k = 0;
  BigInt p = 1;
  while (p < target) {
    p *= 2;
    ++k;
  }
  return k;
}

bool delta_bound_holds(HalfInteger delta, unsigned n0) {
  if (delta.twice() < 0) return true;
  BigInt lhs, rhs;
  mpz_ui_pow_ui(lhs.get_mpz_t(), 2, static_cast<unsigned long>(delta.twice()));
  mpz_ui_pow_ui(rhs.get_mpz_t(), n0 + 2, 32);
  return lhs <= rhs;
}

double delta_bound_value(unsigned n0) { return 16.0 * std::log2(static_cast<double>(n0) + 2.0); }

// ------------------------------------------------------------- Word length

namespace {

struct LengthMinimum {
  std::int64_t length = 0;
  std::int64_t i = 0;
  BigInt a_length;
};

LengthMinimum minimize_length(const Family& f, const GroupPoint& x, bool unchecked) {
  if (!unchecked && !f.a_length_validated()) {
    throw UncheckedFamily("word_length: family '" + f.name() +
                          "' has an unvalidated A-length; pass the unchecked flag to override");
  }
  constexpr std::int64_t kMaxSteps = 1 << 16;
  const std::int64_t i0 = std::max<std::int64_t>(0, -x.m);
  HElement y = f.alpha_pow(x.h, i0);
  std::optional<BigInt> best;
  LengthMinimum result;
  for (std::int64_t i = i0; i - i0 <= kMaxSteps; ++i) {
    const ALength l = f.a_length(y);
    if (l.is_finite()) {
      BigInt objective = BigInt(2 * i + x.m) + l.value();
      if (!best || objective <= *best) {
        best = objective;
        result.i = i;
        result.a_length = l.value();
      }
      if (l.value() <= 1) {
        if (!best->fits_slong_p()) throw std::overflow_error("word_length: length exceeds 64 bits");
        result.length = best->get_si();
        return result;
      }
    }
    y = f.alpha(y);
  }
  throw std::runtime_error("word_length: alpha^i(h) did not enter A within " + std::to_string(kMaxSteps) +
                           " steps for " + format_point(f, x));
}

}  // namespace

std::int64_t word_length(const Family& f, const GroupPoint& x, bool unchecked) {
  return minimize_length(f, x, unchecked).length;
}

NormalForm geodesic_normal_form(const Family& f, const GroupPoint& x, bool unchecked) {
  const LengthMinimum best = minimize_length(f, x, unchecked);
  if (!best.a_length.fits_ulong_p() || best.a_length > (1u << 24)) {
    throw std::length_error("geodesic_witness: A-factorization too long to materialize");
  }
  NormalForm nf;
  nf.i = static_cast<std::uint64_t>(best.i);
  nf.j = static_cast<std::uint64_t>(x.m + best.i);
  nf.gs = f.decompose_A(f.alpha_pow(x.h, best.i), best.a_length.get_ui());
  return nf;
}

// ----------------------------------------------------------------- BFS oracle

namespace {

struct WindowBfs {
  std::vector<HElement> hs;
  std::unordered_map<std::string, std::size_t> index;
  // distance per (h index, m + radius); -1 when unreached
  std::vector<int> dist;
  bool truncated = false;

  int at(std::size_t hi, std::int64_t m, int radius) const {
    return dist[hi * (2 * radius + 1) + static_cast<std::size_t>(m + radius)];
  }
};

WindowBfs run_window_bfs(const Family& f, const Window& w, int radius, std::size_t limit) {
  WindowBfs bfs;
  bfs.truncated = f.window_count(w) > limit;
  bfs.hs = f.window_elements(w, limit);
  for (std::size_t i = 0; i < bfs.hs.size(); ++i) bfs.index.emplace(f.canonical_bytes(bfs.hs[i]), i);
  const std::size_t levels = static_cast<std::size_t>(2 * radius + 1);
  bfs.dist.assign(bfs.hs.size() * levels, -1);
  const auto start = bfs.index.find(f.canonical_bytes(f.identity()));
  if (start == bfs.index.end()) throw std::logic_error("bfs_oracle: identity outside the window");

  std::vector<HElement> inverses;
  inverses.reserve(bfs.hs.size());
  for (const auto& h : bfs.hs) inverses.push_back(f.invert(h));

  auto slot = [&](std::size_t hi, std::int64_t m) { return hi * levels + static_cast<std::size_t>(m + radius); };
  std::deque<std::pair<std::size_t, std::int64_t>> queue;
  bfs.dist[slot(start->second, 0)] = 0;
  queue.emplace_back(start->second, 0);
  while (!queue.empty()) {
    const auto [hi, m] = queue.front();
    queue.pop_front();
    const int d = bfs.dist[slot(hi, m)];
    if (d >= radius) continue;
    auto visit = [&](std::size_t hj, std::int64_t mj) {
      int& target = bfs.dist[slot(hj, mj)];
      if (target < 0) {
        target = d + 1;
        queue.emplace_back(hj, mj);
      }
    };
    if (m + 1 <= radius) visit(hi, m + 1);
    if (m - 1 >= -radius) visit(hi, m - 1);
    // (h, m)(a, 0) = (h alpha^m(a), m): h' is adjacent iff alpha^-m(h^-1 h') is in A.
    for (std::size_t hj = 0; hj < bfs.hs.size(); ++hj) {
      if (hj == hi || bfs.dist[slot(hj, m)] >= 0) continue;
      if (f.in_A(f.alpha_pow(f.multiply(inverses[hi], bfs.hs[hj]), -m))) visit(hj, m);
    }
  }
  return bfs;
}

}  // namespace

std::size_t BfsOracle::trusted_count() const {
  return static_cast<std::size_t>(std::count(trusted.begin(), trusted.end(), true));
}

nlohmann::json BfsOracle::to_json(const Family& f) const {
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    pts.push_back({{"point", format_point(f, points[i])}, {"distance", distance[i]}, {"trusted", bool(trusted[i])}});
  }
  return {{"window", window.to_json()},
          {"radius", radius},
          {"truncated", truncated},
          {"n_points", points.size()},
          {"n_trusted", trusted_count()},
          {"points", pts}};
}

BfsOracle bfs_oracle(const Family& f, const Window& window, int radius, std::size_t limit) {
  if (radius < 0) throw std::invalid_argument("bfs_oracle: negative radius");
  BfsOracle out;
  out.window = window;
  out.radius = radius;
  const WindowBfs inner = run_window_bfs(f, window, radius, limit);
  const WindowBfs outer = run_window_bfs(f, window.enlarged(), radius, limit);
  out.truncated = inner.truncated || outer.truncated;
  for (std::size_t hi = 0; hi < inner.hs.size(); ++hi) {
    const auto outer_it = outer.index.find(f.canonical_bytes(inner.hs[hi]));
    for (std::int64_t m = -radius; m <= radius; ++m) {
      const int d = inner.at(hi, m, radius);
      if (d < 0) continue;
      const int d_outer = outer_it == outer.index.end() ? -1 : outer.at(outer_it->second, m, radius);
      out.points.push_back({inner.hs[hi], m});
      out.distance.push_back(d);
      out.trusted.push_back(!out.truncated && d_outer == d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------- Balls

std::string Ball::to_dot() const {
  std::ostringstream out;
  out << "graph ball {\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << "  \"" << distances.id(i) << "\" [m=" << points[i].m << "];\n";
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (distances(i, j) == 1) out << "  \"" << distances.id(i) << "\" -- \"" << distances.id(j) << "\";\n";
    }
  }
  out << "}\n";
  return out.str();
}

Ball ball_points(const Family& f, int radius, const BallOptions& options) {
  if (radius < 0) throw std::invalid_argument("ball_points: negative radius");
  Ball ball;
  ball.radius = radius;
  ball.options = options;

  std::vector<GroupPoint> members;
  const auto hs = f.window_elements(options.window, 1u << 20);
  for (std::int64_t m = -radius; m <= radius; ++m) {
    for (const auto& h : hs) {
      GroupPoint x{h, m};
      if (word_length(f, x, options.unchecked) <= radius) members.push_back(std::move(x));
    }
  }
  ball.exhaustive = options.samples == 0 || options.samples >= members.size();
  if (!ball.exhaustive) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(members.begin() + 1, members.end(), rng);
    members.resize(options.samples);
  }
  // Identity first.
  const auto id_it = std::find(members.begin(), members.end(), identity_point(f));
  if (id_it != members.end()) std::iter_swap(members.begin(), id_it);

  const std::size_t n = members.size();
  std::vector<GroupPoint> inverses;
  inverses.reserve(n);
  for (const auto& x : members) inverses.push_back(inverse(f, x));
  std::vector<std::int32_t> d(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto len = word_length(f, multiply(f, inverses[i], members[j]), options.unchecked);
      d[i * n + j] = d[j * n + i] = static_cast<std::int32_t>(len);
    }
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& x : members) ids.push_back(format_point(f, x));
  ball.points = std::move(members);
  ball.distances = DistanceMatrix(std::move(ids), std::move(d));
  return ball;
}

// ----------------------------------------------------------------- Distortion

nlohmann::json DistortionReport::to_json() const {
  nlohmann::json ls = nlohmann::json::array();
  for (const auto& l : levels) {
    nlohmann::json j = {{"m", l.m},
                        {"bound", l.bound},
                        {"products", l.products},
                        {"max_length", l.max_length},
                        {"violations", l.violations}};
    if (l.counterexample) j["counterexample"] = *l.counterexample;
    ls.push_back(j);
  }
  return {{"pass", pass}, {"exhaustive", exhaustive}, {"window", window.to_json()}, {"seed", seed}, {"levels", ls}};
}

DistortionReport distortion_check(const Family& f, unsigned m_max, const Window& window,
                                  std::size_t random_products, std::uint64_t seed, std::size_t limit) {
  DistortionReport report;
  report.window = window;
  report.seed = seed;
  report.exhaustive = random_products == 0;
  const auto as = f.window_A(window, limit);
  if (as.empty()) throw std::invalid_argument("distortion_check: window contains no element of A");

  auto check = [&](DistortionLevel& level, const HElement& p) {
    ++level.products;
    const std::int64_t len = word_length(f, h_point(p));
    level.max_length = std::max(level.max_length, len);
    if (len > level.bound) {
      ++level.violations;
      if (!level.counterexample) level.counterexample = f.format(p) + " has length " + std::to_string(len);
    }
  };

  std::vector<HElement> current = as;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, as.size() - 1);
  for (unsigned m = 0; m <= m_max; ++m) {
    DistortionLevel level;
    level.m = m;
    level.bound = 2 * static_cast<std::int64_t>(f.n0()) * m + 1;
    if (random_products == 0) {
      for (const auto& p : current) check(level, p);
      if (m < m_max) {
        std::unordered_set<std::string> seen;
        std::vector<HElement> next;
        for (const auto& x : current) {
          for (const auto& y : current) {
            HElement p = f.multiply(x, y);
            if (seen.insert(f.canonical_bytes(p)).second) {
              if (next.size() >= limit) {
                report.exhaustive = false;
                break;
              }
              next.push_back(std::move(p));
            }
          }
        }
        current = std::move(next);
      }
    } else {
      const std::uint64_t factors = std::uint64_t{1} << m;
      for (std::size_t s = 0; s < random_products; ++s) {
        HElement p = f.identity();
        for (std::uint64_t t = 0; t < factors; ++t) p = f.multiply(p, as[pick(rng)]);
        check(level, p);
      }
    }
    report.pass = report.pass && level.violations == 0;
    report.levels.push_back(std::move(level));
  }
  return report;
}

Word random_word(const std::vector<HElement>& windowed_A, std::size_t length,
                 std::mt19937_64& rng) {
  if (windowed_A.empty()) throw std::invalid_argument("random_word: empty generator sample");
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_int_distribution<std::size_t> pick(0, windowed_A.size() - 1);
  Word w;
  w.reserve(length);
  for (std::size_t s = 0; s < length; ++s) {
    switch (kind(rng)) {
      case 0:
        w.push_back(Letter::alpha_plus());
        break;
      case 1:
        w.push_back(Letter::alpha_minus());
        break;
      default:
        w.push_back(Letter::gen(windowed_A[pick(rng)]));
        break;
    }
  }
  return w;
}

}  // namespace focal
