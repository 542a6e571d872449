#include "focal/metric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace focal {

std::string HalfInteger::to_string() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

std::ostream& operator<<(std::ostream& os, HalfInteger h) { return os << h.to_string(); }

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids, std::vector<std::int32_t> entries)
    : ids_(std::move(ids)), d_(std::move(entries)) {
  const std::size_t n = ids_.size();
  if (d_.size() != n * n) {
    throw std::invalid_argument("distance matrix: expected " + std::to_string(n * n) +
                                " entries, got " + std::to_string(d_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw std::invalid_argument("distance matrix: duplicate point id '" + ids_[i] + "'");
    }
    if ((*this)(i, i) != 0) {
      throw std::invalid_argument("distance matrix: nonzero diagonal at '" + ids_[i] + "'");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) {
        throw std::invalid_argument("distance matrix: asymmetric entry (" + ids_[i] + ", " +
                                    ids_[j] + ")");
      }
      if ((*this)(i, j) < 0) {
        throw std::invalid_argument("distance matrix: negative entry (" + ids_[i] + ", " +
                                    ids_[j] + ")");
      }
    }
  }
}

std::size_t DistanceMatrix::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::invalid_argument("unknown point id '" + id + "'");
  return it->second;
}

std::int32_t DistanceMatrix::diameter() const {
  return d_.empty() ? 0 : *std::max_element(d_.begin(), d_.end());
}

std::optional<std::array<std::size_t, 3>> DistanceMatrix::triangle_violation() const {
  const std::size_t n = size();
  for (std::size_t y = 0; y < n; ++y) {
    const std::int32_t* ry = row(y);
    for (std::size_t x = 0; x < n; ++x) {
      const std::int32_t* rx = row(x);
      const std::int32_t dxy = ry[x];
      for (std::size_t z = 0; z < n; ++z) {
        if (rx[z] > dxy + ry[z]) return std::array<std::size_t, 3>{x, y, z};
      }
    }
  }
  return std::nullopt;
}

DistanceMatrix DistanceMatrix::restrict_to(const std::vector<std::size_t>& indices) const {
  std::vector<std::string> ids;
  std::vector<std::int32_t> entries;
  ids.reserve(indices.size());
  entries.reserve(indices.size() * indices.size());
  for (auto i : indices) ids.push_back(ids_.at(i));
  for (auto i : indices)
    for (auto j : indices) entries.push_back((*this)(i, j));
  return DistanceMatrix(std::move(ids), std::move(entries));
}

std::string DistanceMatrix::to_csv() const {
  std::ostringstream out;
  csv::write_row(out, ids_);
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out << ',';
      out << (*this)(i, j);
    }
    out << '\n';
  }
  return out.str();
}

DistanceMatrix DistanceMatrix::from_csv(const std::string& text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw std::invalid_argument("distance CSV: missing header row");
  std::vector<std::string> ids = rows.front();
  if (rows.size() != ids.size() + 1) {
    throw std::invalid_argument("distance CSV: expected " + std::to_string(ids.size()) +
                                " data rows, got " + std::to_string(rows.size() - 1));
  }
  std::vector<std::int32_t> entries;
  entries.reserve(ids.size() * ids.size());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != ids.size()) {
      throw std::invalid_argument("distance CSV: row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " fields");
    }
    for (const auto& field : rows[r]) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != field.size()) {
        throw std::invalid_argument("distance CSV: non-integer entry '" + field + "'");
      }
      entries.push_back(static_cast<std::int32_t>(v));
    }
  }
  return DistanceMatrix(std::move(ids), std::move(entries));
}

HalfInteger gromov_product(const DistanceMatrix& d, std::size_t y, std::size_t z, std::size_t base) {
  if (y >= d.size() || z >= d.size() || base >= d.size()) {
    throw std::invalid_argument("gromov_product: point index out of range");
  }
  return HalfInteger::from_twice(std::int64_t{d(base, y)} + d(base, z) - d(y, z));
}

HalfInteger gromov_product(const DistanceMatrix& d, const std::string& y, const std::string& z,
                           const std::string& base) {
  return gromov_product(d, d.index_of(y), d.index_of(z), d.index_of(base));
}

namespace {

// S_max - S_mid of the three pair sums, i.e. twice the quadruple's delta.
inline std::int32_t pair_sum_gap(std::int32_t s1, std::int32_t s2, std::int32_t s3) {
  const std::int32_t mx = std::max(s1, std::max(s2, s3));
  const std::int32_t mn = std::min(s1, std::min(s2, s3));
  return 2 * mx + mn - (s1 + s2 + s3);
}

// Hot loop of the exhaustive scan: fixed a < b < c, w ranging over [from, n).
// Rows are narrowed to 16 bits so each vector lane holds twice as many points.
__attribute__((target_clones("arch=skylake-avx512", "avx2", "default")))
std::int32_t row_gap_max(const std::int16_t* __restrict rc, const std::int16_t* __restrict ra,
                         const std::int16_t* __restrict rb, std::size_t from, std::size_t n,
                         std::int16_t dab, std::int16_t dac, std::int16_t dbc) {
  std::int16_t best = 0;
  for (std::size_t w = from; w < n; ++w) {
    const std::int16_t s1 = static_cast<std::int16_t>(dab + rc[w]);
    const std::int16_t s2 = static_cast<std::int16_t>(dac + rb[w]);
    const std::int16_t s3 = static_cast<std::int16_t>(dbc + ra[w]);
    const std::int16_t mx = std::max(s1, std::max(s2, s3));
    const std::int16_t mn = std::min(s1, std::min(s2, s3));
    const std::int16_t gap = static_cast<std::int16_t>(2 * mx + mn - (s1 + s2 + s3));
    best = std::max(best, gap);
  }
  return best;
}

}  // namespace

HalfInteger quadruple_delta(const DistanceMatrix& d, std::size_t x, std::size_t y, std::size_t z,
                            std::size_t w) {
  return HalfInteger::from_twice(
      pair_sum_gap(d(x, y) + d(z, w), d(x, z) + d(y, w), d(x, w) + d(y, z)));
}

DeltaReport four_point_delta(const DistanceMatrix& d, const DeltaOptions& options) {
  DeltaReport report;
  const std::size_t n = d.size();
  report.n_points = n;
  report.seed = options.seed;
  if (n == 0) throw std::invalid_argument("four_point_delta: empty point set");

  if (n <= options.exhaustive_cutoff) {
    report.exhaustive = true;
    std::int32_t best = 0;
    std::uint64_t count = 0;
    if (d.diameter() > 8000) throw std::overflow_error("four_point_delta: distances too large for the exhaustive scan");
    std::vector<std::int16_t> narrow(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) narrow[i * n + j] = static_cast<std::int16_t>(d(i, j));
    for (std::size_t a = 0; a < n; ++a) {
      const std::int16_t* ra = narrow.data() + a * n;
      for (std::size_t b = a + 1; b < n; ++b) {
        const std::int16_t* rb = narrow.data() + b * n;
        for (std::size_t c = b + 1; c + 1 < n; ++c) {
          const std::int16_t* rc = narrow.data() + c * n;
          const std::int32_t gap = row_gap_max(rc, ra, rb, c + 1, n, ra[b], ra[c], rb[c]);
          count += n - c - 1;
          if (gap > best) {
            best = gap;
            for (std::size_t w = c + 1; w < n; ++w) {
              if (quadruple_delta(d, a, b, c, w).twice() == gap) {
                report.witness = {a, b, c, w};
                break;
              }
            }
          }
        }
      }
    }
    report.delta = HalfInteger::from_twice(best);
    report.samples = count;
    return report;
  }

  report.exhaustive = false;
  report.samples = options.samples;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  HalfInteger best;
  for (std::uint64_t s = 0; s < options.samples; ++s) {
    const std::size_t x = pick(rng), y = pick(rng), z = pick(rng), w = pick(rng);
    const HalfInteger q = quadruple_delta(d, x, y, z, w);
    if (q > best) {
      best = q;
      report.witness = {x, y, z, w};
    }
  }
  report.delta = best;
  return report;
}

nlohmann::json DeltaReport::to_json() const {
  return {{"delta", delta.to_string()},
          {"delta_twice", delta.twice()},
          {"n_points", n_points},
          {"exhaustive", exhaustive},
          {"samples", samples},
          {"seed", seed}};
}

nlohmann::json QIReport::to_json() const {
  return {{"additive_constant", additive_constant.get_str()},
          {"multiplicative_constant", multiplicative_constant.get_str()},
          {"horizon", horizon},
          {"injective", injective}};
}

namespace {

struct Envelope {
  // Upper constraints t_max(s) <= lambda*s + c and lower constraints
  // s/lambda - c <= t_min(s), one per distinct domain distance s.
  std::vector<std::pair<mpq_class, mpq_class>> upper;  // (s, t_max)
  std::vector<std::pair<mpq_class, mpq_class>> lower;  // (s, t_min)

  mpq_class additive_for(const mpq_class& lambda) const {
    mpq_class c = 0;
    for (const auto& [s, t] : upper) c = std::max(c, mpq_class(t - lambda * s));
    for (const auto& [s, t] : lower) c = std::max(c, mpq_class(s / lambda - t));
    return c;
  }
};

// Slopes between consecutive vertices of the upper convex hull of `pts`
// (sorted by x). These are the breakpoints of max_i (y_i - slope * x_i).
std::vector<mpq_class> hull_slopes(std::vector<std::pair<mpq_class, mpq_class>> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<std::pair<mpq_class, mpq_class>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& a = hull.back();
      const mpq_class cross = (a.first - o.first) * (p.second - o.second) -
                              (a.second - o.second) * (p.first - o.first);
      if (cross >= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  std::vector<mpq_class> slopes;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    const mpq_class dx = hull[i].first - hull[i - 1].first;
    if (dx != 0) slopes.push_back((hull[i].second - hull[i - 1].second) / dx);
  }
  return slopes;
}

}  // namespace

QIReport qi_embedding_check(const std::vector<std::pair<std::int64_t, std::int64_t>>& samples) {
  if (samples.empty()) throw std::invalid_argument("qi_embedding_check: empty sample list");
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> by_domain;  // s -> (t_min, t_max)
  QIReport report;
  for (auto [s, t] : samples) {
    if (s < 0 || t < 0) throw std::invalid_argument("qi_embedding_check: negative distance");
    if (s > 0 && t == 0) report.injective = false;
    report.horizon = std::max(report.horizon, s);
    auto [it, fresh] = by_domain.try_emplace(s, t, t);
    if (!fresh) {
      it->second.first = std::min(it->second.first, t);
      it->second.second = std::max(it->second.second, t);
    }
  }

  Envelope env;
  std::vector<mpq_class> candidates{mpq_class(1)};
  for (const auto& [s, tt] : by_domain) {
    env.upper.emplace_back(mpq_class(s), mpq_class(tt.second));
    env.lower.emplace_back(mpq_class(s), mpq_class(tt.first));
    if (s > 0) candidates.emplace_back(tt.second, s);
    if (tt.first > 0) candidates.emplace_back(s, tt.first);
  }
  for (const auto& slope : hull_slopes(env.upper)) candidates.push_back(slope);
  // Lower constraints are max_i (mu*s_i - t_i) in mu = 1/lambda; their
  // breakpoints are the negated hull slopes of the points (s, -t_min).
  std::vector<std::pair<mpq_class, mpq_class>> lower_pts;
  for (const auto& [s, t] : env.lower) lower_pts.emplace_back(s, -t);
  for (const auto& slope : hull_slopes(lower_pts)) {
    const mpq_class mu = -slope;
    if (mu > 0) candidates.push_back(1 / mu);
  }

  // Ternary search for the real minimiser of the convex cost, then the
  // nearest fractions of denominator <= 64 on either side of it.
  auto cost_at = [&](double lambda) {
    double c = 0;
    for (const auto& [s, t] : env.upper) c = std::max(c, t.get_d() - lambda * s.get_d());
    for (const auto& [s, t] : env.lower) c = std::max(c, s.get_d() / lambda - t.get_d());
    return lambda + c;
  };
  double lo = 1, hi = 1;
  for (const auto& l : candidates) hi = std::max(hi, l.get_d());
  hi += 1;
  for (int iter = 0; iter < 200; ++iter) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (cost_at(m1) <= cost_at(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  const double star = (lo + hi) / 2;
  for (long den = 1; den <= 64; ++den) {
    const double scaled = star * static_cast<double>(den);
    for (double num : {std::floor(scaled - 1e-7), std::floor(scaled), std::ceil(scaled), std::ceil(scaled + 1e-7)}) {
      candidates.emplace_back(static_cast<long>(num), den);
    }
  }

  bool have = false;
  mpq_class best_lambda, best_c, best_cost;
  for (auto& lambda : candidates) {
    lambda.canonicalize();
    if (lambda < 1) continue;
    const mpq_class c = env.additive_for(lambda);
    const mpq_class cost = lambda + c;
    if (!have || cost < best_cost || (cost == best_cost && lambda < best_lambda)) {
      have = true;
      best_lambda = lambda;
      best_c = c;
      best_cost = cost;
    }
  }
  report.multiplicative_constant = best_lambda;
  report.additive_constant = best_c;
  return report;
}

}  // namespace focal
