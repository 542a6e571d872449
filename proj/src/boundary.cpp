#include "focal/boundary.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace focal {

namespace {

std::string q_str(const mpq_class& q) { return q.get_str(); }

mpq_class ratio(std::int64_t a, std::int64_t b) {
  mpq_class q(a, b);
  q.canonicalize();
  return q;
}

}  // namespace

// --------------------------------------------------------- Translation number

nlohmann::json TranslationNumber::to_json() const {
  nlohmann::json j = {{"estimate", q_str(estimate)}, {"upper_bound", q_str(upper_bound)},
                      {"horizon", horizon}, {"exact", exact()}};
  j["value"] = exact_value ? nlohmann::json(q_str(*exact_value)) : nlohmann::json();
  return j;
}

TranslationNumber translation_number(const Family& f, const GroupPoint& g, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("translation_number: horizon must be >= 1");
  TranslationNumber t;
  t.horizon = N;
  GroupPoint gn = identity_point(f);
  for (std::int64_t n = 1; n <= N; ++n) {
    gn = multiply(f, gn, g);
    const mpq_class r = ratio(word_length(f, gn), n);
    if (n == 1 || r < t.upper_bound) t.upper_bound = r;
    if (n == N) t.estimate = r;
  }
  if (f.a_length_validated()) t.exact_value = mpq_class(g.m < 0 ? -g.m : g.m);
  return t;
}

// ------------------------------------------------------------- Isometry type

std::string to_string(IsometryKind k) {
  switch (k) {
    case IsometryKind::Elliptic:
      return "Elliptic";
    case IsometryKind::Parabolic:
      return "Parabolic";
    case IsometryKind::Hyperbolic:
      return "Hyperbolic";
  }
  return "?";
}

nlohmann::json IsometryType::to_json() const {
  return {{"type", to_string(kind)}, {"horizon", evidence_horizon}, {"exact", exact}, {"witness", witness}};
}

IsometryType isometry_type(const Family& f, const GroupPoint& g, std::int64_t N) {
  if (N < 1) throw std::invalid_argument("isometry_type: horizon must be >= 1");
  IsometryType t;
  t.evidence_horizon = N;
  const bool validated = f.a_length_validated();
  if (g.m != 0) {
    t.kind = IsometryKind::Hyperbolic;
    t.exact = validated;
    t.witness = "translation number |m| = " + std::to_string(g.m < 0 ? -g.m : g.m);
    return t;
  }
  if (const auto order = f.torsion_order(g.h, static_cast<std::uint64_t>(N))) {
    t.kind = IsometryKind::Elliptic;
    t.exact = true;
    t.witness = "g^" + std::to_string(*order) + " = 1";
    return t;
  }
  if (validated && f.parabolic_certificate(g.h)) {
    t.kind = IsometryKind::Parabolic;
    t.exact = true;
    t.witness = "m = 0 and d(1, g^n) is nondecreasing and unbounded in n";
    return t;
  }
  std::int64_t first_half = 0, second_half = 0;
  GroupPoint gn = identity_point(f);
  for (std::int64_t n = 1; n <= N; ++n) {
    gn = multiply(f, gn, g);
    const std::int64_t len = word_length(f, gn, true);
    std::int64_t& half = 2 * n <= N ? first_half : second_half;
    half = std::max(half, len);
  }
  t.exact = false;
  t.kind = second_half > first_half ? IsometryKind::Parabolic : IsometryKind::Elliptic;
  t.witness = "orbit lengths up to n = " + std::to_string(N) + " peak at " +
              std::to_string(std::max(first_half, second_half));
  return t;
}

// ----------------------------------------------------------------- Horokernel

namespace {

// Least n >= -m with l_A(alpha^n(h^-1)) <= 1. From there on
// d((h, m), alpha^-n) = n + m + l_A(alpha^n(h^-1)) and the summand is fixed.
std::int64_t entry_index(const Family& f, const GroupPoint& y, std::int64_t cap) {
  std::int64_t n = std::max<std::int64_t>(0, -y.m);
  HElement z = f.alpha_pow(f.invert(y.h), n);
  for (; n <= cap; ++n) {
    const ALength l = f.a_length(z);
    if (l.is_finite() && l.value() <= 1) return n;
    z = f.alpha(z);
  }
  return cap + 1;
}

}  // namespace

std::int64_t horokernel(const Family& f, const GroupPoint& x, const GroupPoint& y,
                        const HorokernelOptions& options) {
  if (!f.a_length_validated()) {
    throw UncheckedFamily("horokernel: family '" + f.name() + "' has an unvalidated A-length");
  }
  const std::int64_t settled = std::max(entry_index(f, x, options.max_horizon),
                                        entry_index(f, y, options.max_horizon));
  std::vector<std::int64_t> trace;
  std::int64_t run = 0;
  for (std::int64_t n = 1; n <= options.max_horizon; ++n) {
    const GroupPoint xn = alpha_point(f, -n);
    const std::int64_t v = distance(f, y, xn) - distance(f, x, xn);
    run = (!trace.empty() && trace.back() == v) ? run + 1 : 1;
    trace.push_back(v);
    if (n >= settled && run >= options.stable_run) return v;
  }
  throw StabilizationError("horokernel: no stable value within horizon " + std::to_string(options.max_horizon),
                           std::move(trace));
}

nlohmann::json QuasicharacterEstimate::to_json() const {
  return {{"value", q_str(value)},
          {"estimate", q_str(estimate)},
          {"defect_bound", q_str(defect_bound)},
          {"horokernel", horokernel_value},
          {"horokernel_gap", q_str(horokernel_gap)},
          {"horizon", horizon},
          {"exact", exact}};
}

QuasicharacterEstimate busemann_quasicharacter(const Family& f, const GroupPoint& g, std::int64_t N,
                                               const HorokernelOptions& options) {
  if (N < 1) throw std::invalid_argument("busemann_quasicharacter: horizon must be >= 1");
  QuasicharacterEstimate q;
  q.horizon = N;
  q.exact = f.a_length_validated();
  const GroupPoint one = identity_point(f);
  q.estimate = ratio(horokernel(f, one, power(f, g, N), options), N);
  q.value = q.exact ? mpq_class(g.m) : q.estimate;
  q.defect_bound = 0;
  q.horokernel_value = horokernel(f, one, g, options);
  q.horokernel_gap = abs(q.value - q.horokernel_value);
  return q;
}

// ---------------------------------------------------------------- Action type

std::string to_string(ActionKind k) {
  switch (k) {
    case ActionKind::Bounded:
      return "Bounded";
    case ActionKind::Horocyclic:
      return "Horocyclic";
    case ActionKind::Lineal:
      return "Lineal";
    case ActionKind::Focal:
      return "Focal";
    case ActionKind::GeneralType:
      return "GeneralType";
  }
  return "?";
}

nlohmann::json ActionTypeReport::to_json() const {
  nlohmann::json j = {{"type", to_string(kind)},
                      {"horizon", horizon},
                      {"low_confidence", low_confidence},
                      {"orbit_radius", orbit_radius},
                      {"witnesses", witnesses}};
  j["axis_distance"] = axis_distance ? nlohmann::json(*axis_distance) : nlohmann::json();
  j["axis_threshold"] = axis_threshold ? nlohmann::json(q_str(*axis_threshold)) : nlohmann::json();
  return j;
}

namespace {

struct Orbit {
  std::vector<GroupPoint> points;
  // points[0, layer_end[l]) are reached by words of length <= l.
  std::vector<std::size_t> layer_end;
  bool truncated = false;
};

Orbit word_orbit(const Family& f, const std::vector<GroupPoint>& generators, std::int64_t L, std::size_t cap) {
  std::vector<GroupPoint> steps;
  for (const auto& g : generators) {
    steps.push_back(g);
    steps.push_back(inverse(f, g));
  }
  Orbit orbit;
  std::unordered_set<std::string> seen;
  orbit.points.push_back(identity_point(f));
  seen.insert(point_key(f, orbit.points.front()));
  orbit.layer_end.push_back(1);
  std::size_t begin = 0;
  for (std::int64_t l = 1; l <= L; ++l) {
    const std::size_t end = orbit.points.size();
    for (std::size_t i = begin; i < end && !orbit.truncated; ++i) {
      for (const auto& s : steps) {
        GroupPoint p = multiply(f, orbit.points[i], s);
        if (seen.insert(point_key(f, p)).second) {
          if (orbit.points.size() >= cap) {
            orbit.truncated = true;
            break;
          }
          orbit.points.push_back(std::move(p));
        }
      }
    }
    begin = end;
    orbit.layer_end.push_back(orbit.points.size());
  }
  return orbit;
}

std::int64_t axis_distance(const Family& f, const GroupPoint& p) {
  std::int64_t best = distance(f, p, alpha_point(f, p.m));
  for (std::int64_t k = 1; k < best; ++k) {
    best = std::min(best, distance(f, p, alpha_point(f, p.m + k)));
    best = std::min(best, distance(f, p, alpha_point(f, p.m - k)));
  }
  return best;
}

}  // namespace

ActionTypeReport action_type(const Family& f, const std::vector<GroupPoint>& generators, std::int64_t L,
                             const ActionTypeOptions& options) {
  if (L < 1) throw std::invalid_argument("action_type: horizon must be >= 1");
  if (!options.generators_at && generators.empty()) {
    throw std::invalid_argument("action_type: empty generator list");
  }
  ActionTypeReport report;
  report.horizon = L;
  report.low_confidence = L < 4;

  auto radius_of = [&](const Orbit& orbit, std::size_t upto, std::string* witness) {
    std::int64_t r = 0;
    for (std::size_t i = 0; i < upto; ++i) {
      const std::int64_t len = word_length(f, orbit.points[i]);
      if (len > r) {
        r = len;
        if (witness) *witness = format_point(f, orbit.points[i]);
      }
    }
    return r;
  };

  std::vector<GroupPoint> final_gens;
  Orbit final_orbit;
  std::string witness;
  if (options.generators_at) {
    for (std::int64_t l = 0; l <= L; ++l) {
      const auto gens = options.generators_at(l);
      const Orbit orbit = word_orbit(f, gens, l, options.max_points);
      report.low_confidence = report.low_confidence || orbit.truncated;
      report.orbit_radius.push_back(radius_of(orbit, orbit.points.size(), l == L ? &witness : nullptr));
      if (l == L) {
        final_gens = gens;
        final_orbit = orbit;
      }
    }
  } else {
    final_gens = generators;
    final_orbit = word_orbit(f, generators, L, options.max_points);
    report.low_confidence = report.low_confidence || final_orbit.truncated;
    for (std::int64_t l = 0; l <= L; ++l) {
      report.orbit_radius.push_back(radius_of(final_orbit, final_orbit.layer_end[l], l == L ? &witness : nullptr));
    }
  }
  if (final_gens.empty()) throw std::invalid_argument("action_type: empty generator list");

  const bool elliptic_subgroup =
      std::all_of(final_gens.begin(), final_gens.end(), [](const GroupPoint& g) { return g.m == 0; });
  if (elliptic_subgroup) {
    const std::int64_t from = (L + 1) / 2;
    const bool flat = std::all_of(report.orbit_radius.begin() + from, report.orbit_radius.end(),
                                  [&](std::int64_t r) { return r == report.orbit_radius.back(); });
    report.kind = flat ? ActionKind::Bounded : ActionKind::Horocyclic;
    report.witnesses.push_back("all generators have m = 0");
    report.witnesses.push_back((flat ? "orbit radius settles at " : "orbit radius grows to ") +
                               std::to_string(report.orbit_radius.back()) + " (" + witness + ")");
    return report;
  }

  std::int64_t max_gen = 0;
  for (const auto& g : final_gens) max_gen = std::max(max_gen, word_length(f, g));
  const mpq_class threshold = 2 * options.delta + max_gen;
  std::int64_t far = 0;
  std::string far_point;
  for (const auto& p : final_orbit.points) {
    const std::int64_t d = axis_distance(f, p);
    if (d > far) {
      far = d;
      far_point = format_point(f, p);
    }
  }
  report.axis_distance = far;
  report.axis_threshold = threshold;
  report.kind = far <= threshold ? ActionKind::Lineal : ActionKind::Focal;
  report.witnesses.push_back("a generator has m != 0");
  if (!far_point.empty()) {
    report.witnesses.push_back("farthest orbit point from the axis: " + far_point + " at distance " +
                               std::to_string(far));
  }
  return report;
}

// ------------------------------------------------------------------- Schottky

nlohmann::json SchottkyReport::to_json() const {
  nlohmann::json j = {{"qi", qi.to_json()}, {"injective", injective}, {"words", words}, {"accepted", accepted}};
  j["collision"] = collision ? nlohmann::json({collision->first, collision->second}) : nlohmann::json();
  return j;
}

SchottkyReport schottky_semigroup_check(const Family& f, const GroupPoint& a, const GroupPoint& b, unsigned L) {
  if (L > 14) throw std::invalid_argument("schottky_semigroup_check: L must be <= 14");
  struct Entry {
    std::string word;
    GroupPoint inv;
    GroupPoint value;
  };
  std::vector<Entry> entries;
  entries.push_back({"", identity_point(f), identity_point(f)});
  std::unordered_map<std::string, std::size_t> by_key;
  SchottkyReport report;
  by_key.emplace(point_key(f, entries.front().value), 0);
  std::size_t begin = 0;
  for (unsigned len = 1; len <= L; ++len) {
    const std::size_t end = entries.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (int letter = 0; letter < 2; ++letter) {
        Entry e;
        e.word = entries[i].word + (letter ? 'b' : 'a');
        e.value = multiply(f, entries[i].value, letter ? b : a);
        e.inv = inverse(f, e.value);
        auto [it, fresh] = by_key.emplace(point_key(f, e.value), entries.size());
        if (!fresh && !report.collision) {
          report.injective = false;
          report.collision = std::make_pair(entries[it->second].word, e.word);
        }
        entries.push_back(std::move(e));
      }
    }
    begin = end;
  }
  report.words = entries.size();

  std::vector<std::pair<std::int64_t, std::int64_t>> samples;
  samples.reserve(entries.size() * (entries.size() - 1) / 2);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string& u = entries[i].word;
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const std::string& v = entries[j].word;
      std::size_t common = 0;
      while (common < u.size() && common < v.size() && u[common] == v[common]) ++common;
      const auto s = static_cast<std::int64_t>(u.size() + v.size() - 2 * common);
      samples.emplace_back(s, word_length(f, multiply(f, entries[i].inv, entries[j].value)));
    }
  }
  report.qi = qi_embedding_check(samples);
  report.injective = report.injective && report.qi.injective;
  report.accepted = report.injective;
  return report;
}

}  // namespace focal
