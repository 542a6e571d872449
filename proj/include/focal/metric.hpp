#pragma once

// Exact metric primitives over finite distance data: Gromov products,
// four-point hyperbolicity constants and quasi-isometry constants.

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace focal {

/// Exact half-integer, stored as twice its value.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  static constexpr HalfInteger from_twice(std::int64_t twice) {
    HalfInteger h;
    h.twice_ = twice;
    return h;
  }
  static constexpr HalfInteger integer(std::int64_t v) { return from_twice(2 * v); }

  constexpr std::int64_t twice() const { return twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  mpq_class to_rational() const { return mpq_class(twice_, 2); }
  double to_double() const { return static_cast<double>(twice_) / 2.0; }
  std::string to_string() const;

  constexpr auto operator<=>(const HalfInteger&) const = default;
  constexpr HalfInteger operator-(HalfInteger o) const { return from_twice(twice_ - o.twice_); }
  constexpr HalfInteger operator+(HalfInteger o) const { return from_twice(twice_ + o.twice_); }

 private:
  std::int64_t twice_ = 0;
};

std::ostream& operator<<(std::ostream& os, HalfInteger h);

/// Symmetric integer distances over a finite, ordered set of named points.
/// Immutable once constructed.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  /// `entries` is row-major, size ids.size()^2. Throws std::invalid_argument
  /// on a non-square, asymmetric, negative or nonzero-diagonal matrix, or on
  /// duplicate ids.
  DistanceMatrix(std::vector<std::string> ids, std::vector<std::int32_t> entries);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  std::size_t index_of(const std::string& id) const;

  std::int32_t operator()(std::size_t i, std::size_t j) const { return d_[i * ids_.size() + j]; }
  std::int32_t distance(const std::string& a, const std::string& b) const {
    return (*this)(index_of(a), index_of(b));
  }
  const std::int32_t* row(std::size_t i) const { return d_.data() + i * ids_.size(); }
  std::int32_t diameter() const;

  /// First triple (x, y, z) with d(x,z) > d(x,y) + d(y,z), if any.
  std::optional<std::array<std::size_t, 3>> triangle_violation() const;
  bool is_metric() const { return !triangle_violation().has_value(); }

  DistanceMatrix restrict_to(const std::vector<std::size_t>& indices) const;

  /// CSV: header row of point ids, then one row of integers per point.
  std::string to_csv() const;
  static DistanceMatrix from_csv(const std::string& text);

 private:
  std::vector<std::string> ids_;
  std::vector<std::int32_t> d_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// (y|z)_base = (d(base,y) + d(base,z) - d(y,z)) / 2.
HalfInteger gromov_product(const DistanceMatrix& d, std::size_t y, std::size_t z, std::size_t base);
HalfInteger gromov_product(const DistanceMatrix& d, const std::string& y, const std::string& z,
                           const std::string& base);

struct DeltaOptions {
  /// Point sets up to this size are enumerated exhaustively.
  std::size_t exhaustive_cutoff = 64;
  std::uint64_t samples = 2'000'000;
  std::uint64_t seed = 0x5eed;
};

struct DeltaReport {
  HalfInteger delta;
  std::size_t n_points = 0;
  bool exhaustive = true;
  /// Number of quadruples examined.
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// A quadruple attaining delta (indices into the matrix).
  std::array<std::size_t, 4> witness{};

  nlohmann::json to_json() const;
};

/// Least delta >= 0 with (y|z)_x >= min((y|w)_x, (w|z)_x) - delta for every
/// ordered quadruple. Exhaustive below the cutoff, otherwise a seeded uniform
/// sample of quadruples (a lower bound on the true constant).
DeltaReport four_point_delta(const DistanceMatrix& d, const DeltaOptions& options = {});

/// Defect of one quadruple: half the gap between the two largest of the
/// three pair sums.
HalfInteger quadruple_delta(const DistanceMatrix& d, std::size_t x, std::size_t y, std::size_t z,
                            std::size_t w);

struct QIReport {
  mpq_class additive_constant;
  mpq_class multiplicative_constant{1};
  std::int64_t horizon = 0;
  bool injective = true;

  nlohmann::json to_json() const;
};

/// Tightest (lambda, c) with s/lambda - c <= t <= lambda*s + c over all
/// (domain distance s, image distance t) samples. Lambda is chosen among the
/// breakpoints of the constraint envelope and the fractions of denominator
/// <= 64 around the real minimiser of lambda + c.
QIReport qi_embedding_check(const std::vector<std::pair<std::int64_t, std::int64_t>>& samples);

}  // namespace focal
