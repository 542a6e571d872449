#pragma once

// Concrete confined pairs (H, alpha, A): element arithmetic in H, membership
// in A, the A-length, the confining axioms and the compaction index.
//
// A family is a stateless descriptor. Elements of H are plain values
// (HElement) interpreted by the family that produced them.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <gmpxx.h>

#include "json.hpp"

namespace focal {

using BigInt = mpz_class;

class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Finitely supported map Z -> Z/q, stored as sorted (position, residue)
/// pairs with nonzero residues.
class LampConfig {
 public:
  using Entry = std::pair<std::int64_t, std::uint32_t>;

  LampConfig() = default;
  /// Reduces mod q, merges repeated positions and drops zero residues.
  static LampConfig from_entries(std::vector<Entry> entries, std::uint32_t q);
  static LampConfig single(std::int64_t position, std::uint32_t value, std::uint32_t q) {
    return from_entries({{position, value}}, q);
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::optional<std::int64_t> min_position() const;
  std::optional<std::int64_t> max_position() const;
  std::uint32_t at(std::int64_t position) const;

  LampConfig shifted(std::int64_t by) const;
  /// Entries at positions < bound.
  LampConfig below(std::int64_t bound) const;

  LampConfig plus(const LampConfig& other, std::uint32_t q) const;
  LampConfig negated(std::uint32_t q) const;

  bool operator==(const LampConfig&) const = default;
  auto operator<=>(const LampConfig&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Element num / n^den_pow of Z[1/n], with den_pow minimal. The base n is
/// held by the family.
class NAdicNumber {
 public:
  NAdicNumber() = default;
  static NAdicNumber make(BigInt num, std::uint32_t den_pow, std::uint32_t base);
  static NAdicNumber integer(long v) { return make(BigInt(v), 0, 2); }

  const BigInt& num() const { return num_; }
  std::uint32_t den_pow() const { return den_pow_; }
  mpq_class value(std::uint32_t base) const;

  bool operator==(const NAdicNumber& o) const { return den_pow_ == o.den_pow_ && num_ == o.num_; }

 private:
  BigInt num_{0};
  std::uint32_t den_pow_ = 0;
};

struct HElement;

struct ProductParts {
  std::vector<HElement> parts;
  bool operator==(const ProductParts& o) const;
};

struct HElement {
  std::variant<LampConfig, NAdicNumber, ProductParts> value;

  bool operator==(const HElement& o) const { return value == o.value; }
};

inline bool ProductParts::operator==(const ProductParts& o) const { return parts == o.parts; }

/// l_A(h) = min{k : h in A^k}, or infinity.
class ALength {
 public:
  static ALength infinite() { return ALength(); }
  explicit ALength(BigInt k) : k_(std::move(k)) {}
  explicit ALength(long k) : k_(BigInt(k)) {}

  bool is_finite() const { return k_.has_value(); }
  const BigInt& value() const;
  std::string to_string() const { return k_ ? k_->get_str() : "inf"; }

  bool operator==(const ALength& o) const { return k_ == o.k_; }
  /// Infinity compares greater than every finite length.
  bool operator<(const ALength& o) const;
  bool operator<=(const ALength& o) const { return !(o < *this); }

 private:
  ALength() = default;
  std::optional<BigInt> k_;
};

/// Finite truncation of H (and hence of A) used by every exhaustive check.
/// Lamplighter families read [lamp_lo, lamp_hi]; n-adic families read
/// den_pow and abs_bound. Products apply the same window to both factors.
struct Window {
  std::int64_t lamp_lo = -3;
  std::int64_t lamp_hi = 3;
  std::uint32_t den_pow = 3;
  std::int64_t abs_bound = 2;

  /// Strictly larger window, used to test stability of windowed results.
  Window enlarged() const;
  nlohmann::json to_json() const;
  /// "lo=-3,hi=3,den=3,abs=2" (any subset of keys).
  static Window parse(std::string_view text);
  bool operator==(const Window&) const = default;
};

/// Capability contract implemented by every confined family.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string name() const = 0;
  /// Config record, e.g. {"family":"lamplighter","q":2}.
  virtual nlohmann::json config() const = 0;

  virtual HElement identity() const = 0;
  virtual HElement multiply(const HElement& a, const HElement& b) const = 0;
  virtual HElement invert(const HElement& a) const = 0;
  virtual HElement alpha(const HElement& a) const = 0;
  virtual HElement alpha_inv(const HElement& a) const = 0;
  /// alpha^k for any integer k.
  virtual HElement alpha_pow(const HElement& a, std::int64_t k) const;

  virtual bool in_A(const HElement& a) const = 0;
  virtual ALength a_length(const HElement& a) const = 0;
  /// alpha^{n0}(A.A) is contained in A.
  virtual unsigned n0() const = 0;
  /// True once the closed-form a_length has been checked against the
  /// brute-force windowed oracle (see a_length_oracle).
  virtual bool a_length_validated() const { return true; }

  /// Injective serialization, used for hashing.
  virtual std::string canonical_bytes(const HElement& a) const = 0;
  /// Compact human-readable form without commas.
  virtual std::string format(const HElement& a) const = 0;
  /// Literal used inside g{...} word letters.
  virtual HElement parse_literal(std::string_view text) const = 0;
  virtual nlohmann::json to_json(const HElement& a) const = 0;
  virtual HElement from_json(const nlohmann::json& j) const = 0;

  /// Number of elements in the windowed truncation of H (saturating).
  virtual std::uint64_t window_count(const Window& w) const = 0;
  /// Elements of the windowed truncation of H, at most `limit` of them.
  virtual std::vector<HElement> window_elements(const Window& w, std::size_t limit) const = 0;
  std::vector<HElement> window_A(const Window& w, std::size_t limit) const;

  /// k elements of A whose product is a, for k >= a_length(a).
  virtual std::vector<HElement> decompose_A(const HElement& a, std::size_t k) const = 0;

  /// [A : alpha(A)] counting surrogate for the modular character.
  virtual std::uint64_t compaction_index() const = 0;

  /// True when a is known to generate an unbounded, distorted cyclic
  /// subgroup of H (a closed-form monotone growth argument applies).
  virtual bool parabolic_certificate(const HElement& a) const = 0;

  /// Smallest k in [1, limit] with a^k = 1.
  std::optional<std::uint64_t> torsion_order(const HElement& a, std::uint64_t limit) const;
  bool is_identity(const HElement& a) const { return a == identity(); }
};

using FamilyPtr = std::shared_ptr<const Family>;

class LamplighterFamily final : public Family {
 public:
  explicit LamplighterFamily(std::uint32_t q);
  std::uint32_t q() const { return q_; }

  std::string name() const override { return "lamplighter"; }
  nlohmann::json config() const override;
  HElement identity() const override { return {LampConfig{}}; }
  HElement multiply(const HElement& a, const HElement& b) const override;
  HElement invert(const HElement& a) const override;
  HElement alpha(const HElement& a) const override { return alpha_pow(a, 1); }
  HElement alpha_inv(const HElement& a) const override { return alpha_pow(a, -1); }
  HElement alpha_pow(const HElement& a, std::int64_t k) const override;
  bool in_A(const HElement& a) const override;
  ALength a_length(const HElement& a) const override;
  unsigned n0() const override { return 0; }
  std::string canonical_bytes(const HElement& a) const override;
  std::string format(const HElement& a) const override;
  HElement parse_literal(std::string_view text) const override;
  nlohmann::json to_json(const HElement& a) const override;
  HElement from_json(const nlohmann::json& j) const override;
  std::uint64_t window_count(const Window& w) const override;
  std::vector<HElement> window_elements(const Window& w, std::size_t limit) const override;
  std::vector<HElement> decompose_A(const HElement& a, std::size_t k) const override;
  std::uint64_t compaction_index() const override { return q_; }
  bool parabolic_certificate(const HElement&) const override { return false; }

  static const LampConfig& lamps(const HElement& a);
  HElement lamp(std::int64_t position, std::uint32_t value = 1) const {
    return {LampConfig::single(position, value, q_)};
  }

 private:
  std::uint32_t q_;
};

class NAdicFamily final : public Family {
 public:
  explicit NAdicFamily(std::uint32_t n);
  std::uint32_t base() const { return n_; }

  std::string name() const override { return "nadic"; }
  nlohmann::json config() const override;
  HElement identity() const override { return {NAdicNumber{}}; }
  HElement multiply(const HElement& a, const HElement& b) const override;
  HElement invert(const HElement& a) const override;
  HElement alpha(const HElement& a) const override { return alpha_pow(a, 1); }
  HElement alpha_inv(const HElement& a) const override { return alpha_pow(a, -1); }
  HElement alpha_pow(const HElement& a, std::int64_t k) const override;
  bool in_A(const HElement& a) const override;
  ALength a_length(const HElement& a) const override;
  unsigned n0() const override { return 1; }
  std::string canonical_bytes(const HElement& a) const override;
  std::string format(const HElement& a) const override;
  HElement parse_literal(std::string_view text) const override;
  nlohmann::json to_json(const HElement& a) const override;
  HElement from_json(const nlohmann::json& j) const override;
  std::uint64_t window_count(const Window& w) const override;
  std::vector<HElement> window_elements(const Window& w, std::size_t limit) const override;
  std::vector<HElement> decompose_A(const HElement& a, std::size_t k) const override;
  std::uint64_t compaction_index() const override { return n_; }
  bool parabolic_certificate(const HElement& a) const override;

  static const NAdicNumber& number(const HElement& a);
  HElement make(const mpq_class& value) const;
  HElement make(long num, std::uint32_t den_pow = 0) const {
    return {NAdicNumber::make(BigInt(num), den_pow, n_)};
  }
  mpq_class value(const HElement& a) const { return number(a).value(n_); }

 private:
  std::uint32_t n_;
};

/// H1 x H2 with alpha acting diagonally and A = A1 x A2.
class ProductFamily final : public Family {
 public:
  ProductFamily(FamilyPtr left, FamilyPtr right);
  const Family& left() const { return *left_; }
  const Family& right() const { return *right_; }

  std::string name() const override { return "product"; }
  nlohmann::json config() const override;
  HElement identity() const override;
  HElement multiply(const HElement& a, const HElement& b) const override;
  HElement invert(const HElement& a) const override;
  HElement alpha(const HElement& a) const override;
  HElement alpha_inv(const HElement& a) const override;
  HElement alpha_pow(const HElement& a, std::int64_t k) const override;
  bool in_A(const HElement& a) const override;
  ALength a_length(const HElement& a) const override;
  unsigned n0() const override;
  bool a_length_validated() const override;
  std::string canonical_bytes(const HElement& a) const override;
  std::string format(const HElement& a) const override;
  HElement parse_literal(std::string_view text) const override;
  nlohmann::json to_json(const HElement& a) const override;
  HElement from_json(const nlohmann::json& j) const override;
  std::uint64_t window_count(const Window& w) const override;
  std::vector<HElement> window_elements(const Window& w, std::size_t limit) const override;
  std::vector<HElement> decompose_A(const HElement& a, std::size_t k) const override;
  std::uint64_t compaction_index() const override;
  bool parabolic_certificate(const HElement& a) const override;

  HElement pair(HElement l, HElement r) const { return {ProductParts{{std::move(l), std::move(r)}}}; }
  static const HElement& left_of(const HElement& a);
  static const HElement& right_of(const HElement& a);

 private:
  FamilyPtr left_, right_;
};

/// A base family with alpha replaced by the identity. It violates the
/// confining axioms and exists to exercise the failure paths.
class IdentityAlphaFamily final : public Family {
 public:
  explicit IdentityAlphaFamily(FamilyPtr base);

  std::string name() const override { return "identity_alpha"; }
  nlohmann::json config() const override;
  HElement identity() const override { return base_->identity(); }
  HElement multiply(const HElement& a, const HElement& b) const override {
    return base_->multiply(a, b);
  }
  HElement invert(const HElement& a) const override { return base_->invert(a); }
  HElement alpha(const HElement& a) const override { return a; }
  HElement alpha_inv(const HElement& a) const override { return a; }
  HElement alpha_pow(const HElement& a, std::int64_t) const override { return a; }
  bool in_A(const HElement& a) const override { return base_->in_A(a); }
  ALength a_length(const HElement& a) const override { return base_->a_length(a); }
  unsigned n0() const override { return base_->n0(); }
  bool a_length_validated() const override { return false; }
  std::string canonical_bytes(const HElement& a) const override { return base_->canonical_bytes(a); }
  std::string format(const HElement& a) const override { return base_->format(a); }
  HElement parse_literal(std::string_view t) const override { return base_->parse_literal(t); }
  nlohmann::json to_json(const HElement& a) const override { return base_->to_json(a); }
  HElement from_json(const nlohmann::json& j) const override { return base_->from_json(j); }
  std::uint64_t window_count(const Window& w) const override { return base_->window_count(w); }
  std::vector<HElement> window_elements(const Window& w, std::size_t limit) const override {
    return base_->window_elements(w, limit);
  }
  std::vector<HElement> decompose_A(const HElement& a, std::size_t k) const override {
    return base_->decompose_A(a, k);
  }
  std::uint64_t compaction_index() const override;
  bool parabolic_certificate(const HElement&) const override { return false; }

 private:
  FamilyPtr base_;
};

/// Builds a family from a config record: {"family":"lamplighter","q":2},
/// {"family":"nadic","n":2}, {"family":"product","left":{..},"right":{..}},
/// {"family":"identity_alpha","base":{..}}. Throws std::invalid_argument.
FamilyPtr make_family(const nlohmann::json& config);

/// Accepts a JSON config record or the shorthands "lamplighter:2",
/// "nadic:3", "product(lamplighter:2,nadic:3)", "identity_alpha(lamplighter:2)".
FamilyPtr parse_family(std::string_view spec);

struct AxiomCheck {
  std::string name;
  bool pass = true;
  std::size_t checked = 0;
  std::optional<std::string> counterexample;
};

struct ConfiningReport {
  bool pass = true;
  /// False when the window exceeded the enumeration bound and was truncated.
  bool complete = true;
  Window window;
  unsigned n0 = 0;
  unsigned exhaust_depth = 0;
  std::vector<AxiomCheck> checks;
  /// Element of A outside alpha(A), when the inclusion is strict.
  std::optional<std::string> strictness_witness;

  nlohmann::json to_json() const;
};

/// Checks the three confining axioms on the windowed truncation:
/// alpha(A) strictly inside A, every windowed h reaching A under alpha^m for
/// some m <= exhaust_depth, and alpha^{n0}(a a') in A for windowed a, a'.
ConfiningReport verify_confining(const Family& family, const Window& window,
                                 unsigned exhaust_depth = 64,
                                 std::size_t enumeration_bound = 1u << 16);

/// Free function form of Family::a_length.
inline ALength a_length(const Family& family, const HElement& h) { return family.a_length(h); }

/// Free function form of Family::compaction_index.
inline std::uint64_t compaction_index(const Family& family) { return family.compaction_index(); }

/// Independent brute-force A-length: breadth-first products of windowed A
/// elements, up to max_k factors. Only meaningful for elements whose
/// geodesic factorizations stay in the window.
struct ALengthOracle {
  std::size_t max_k = 0;
  std::unordered_map<std::string, std::size_t> length_by_key;  // canonical bytes -> k
  /// nullopt when h is not a product of at most max_k windowed A elements.
  std::optional<std::size_t> lookup(const Family& family, const HElement& h) const;
};
ALengthOracle a_length_oracle(const Family& family, const Window& window, std::size_t max_k,
                              std::size_t limit = 1u << 16);

/// Number of classes of windowed A modulo alpha(A) (a in alpha(A)-coset of
/// a' iff alpha^{-1}(a^{-1} a') in A). Equals [A : alpha(A)] when A is a
/// subgroup.
std::uint64_t windowed_coset_count(const Family& family, const Window& window);

}  // namespace focal
