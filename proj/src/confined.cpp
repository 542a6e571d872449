#include "focal/confined.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_set>

#include "text.hpp"

namespace focal {

// ---------------------------------------------------------------- LampConfig

LampConfig LampConfig::from_entries(std::vector<Entry> entries, std::uint32_t q) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  LampConfig c;
  for (const auto& [pos, val] : entries) {
    const std::uint32_t v = val % q;
    if (!c.entries_.empty() && c.entries_.back().first == pos) {
      c.entries_.back().second = (c.entries_.back().second + v) % q;
    } else {
      c.entries_.emplace_back(pos, v);
    }
  }
  std::erase_if(c.entries_, [](const Entry& e) { return e.second == 0; });
  return c;
}

std::optional<std::int64_t> LampConfig::min_position() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.front().first;
}

std::optional<std::int64_t> LampConfig::max_position() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().first;
}

std::uint32_t LampConfig::at(std::int64_t position) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), position,
                             [](const Entry& e, std::int64_t p) { return e.first < p; });
  return (it != entries_.end() && it->first == position) ? it->second : 0;
}

LampConfig LampConfig::shifted(std::int64_t by) const {
  LampConfig c = *this;
  for (auto& e : c.entries_) e.first += by;
  return c;
}

LampConfig LampConfig::below(std::int64_t bound) const {
  LampConfig c;
  for (const auto& e : entries_) {
    if (e.first >= bound) break;
    c.entries_.push_back(e);
  }
  return c;
}

LampConfig LampConfig::plus(const LampConfig& other, std::uint32_t q) const {
  LampConfig c;
  c.entries_.reserve(entries_.size() + other.entries_.size());
  auto a = entries_.begin(), b = other.entries_.begin();
  while (a != entries_.end() || b != other.entries_.end()) {
    if (b == other.entries_.end() || (a != entries_.end() && a->first < b->first)) {
      c.entries_.push_back(*a++);
    } else if (a == entries_.end() || b->first < a->first) {
      c.entries_.push_back(*b++);
    } else {
      const std::uint32_t v = (a->second + b->second) % q;
      if (v) c.entries_.emplace_back(a->first, v);
      ++a;
      ++b;
    }
  }
  return c;
}

LampConfig LampConfig::negated(std::uint32_t q) const {
  LampConfig c = *this;
  for (auto& e : c.entries_) e.second = q - e.second;
  return c;
}

// --------------------------------------------------------------- NAdicNumber

NAdicNumber NAdicNumber::make(BigInt num, std::uint32_t den_pow, std::uint32_t base) {
  NAdicNumber x;
  if (num == 0) return x;
  while (den_pow > 0 && mpz_divisible_ui_p(num.get_mpz_t(), base)) {
    num /= base;
    --den_pow;
  }
  x.num_ = std::move(num);
  x.den_pow_ = den_pow;
  return x;
}

namespace {

BigInt power(std::uint32_t base, std::uint64_t exp) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), base, exp);
  return r;
}

}  // namespace

mpq_class NAdicNumber::value(std::uint32_t base) const {
  mpq_class q(num_, power(base, den_pow_));
  q.canonicalize();
  return q;
}

// ------------------------------------------------------------------- ALength

const BigInt& ALength::value() const {
  if (!k_) throw std::logic_error("ALength::value on an infinite length");
  return *k_;
}

bool ALength::operator<(const ALength& o) const {
  if (!k_) return false;
  if (!o.k_) return true;
  return *k_ < *o.k_;
}

// -------------------------------------------------------------------- Window

Window Window::enlarged() const {
  Window w = *this;
  w.lamp_lo -= 1;
  w.lamp_hi += 1;
  w.den_pow += 1;
  w.abs_bound *= 2;
  return w;
}

nlohmann::json Window::to_json() const {
  return {{"lamp_lo", lamp_lo}, {"lamp_hi", lamp_hi}, {"den_pow", den_pow}, {"abs_bound", abs_bound}};
}

Window Window::parse(std::string_view text) {
  Window w;
  for (const auto& item : text::split_top_level(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("window: expected key=value, got '" + item + "'");
    const std::string key = text::trim(item.substr(0, eq));
    const std::int64_t v = text::parse_int(item.substr(eq + 1));
    if (key == "lo") {
      w.lamp_lo = v;
    } else if (key == "hi") {
      w.lamp_hi = v;
    } else if (key == "den") {
      if (v < 0 || v > 30) throw std::invalid_argument("window: den out of range");
      w.den_pow = static_cast<std::uint32_t>(v);
    } else if (key == "abs") {
      if (v < 0) throw std::invalid_argument("window: abs must be nonnegative");
      w.abs_bound = v;
    } else {
      throw std::invalid_argument("window: unknown key '" + key + "'");
    }
  }
  if (w.lamp_lo > w.lamp_hi) throw std::invalid_argument("window: lo > hi");
  return w;
}

// -------------------------------------------------------------------- Family

HElement Family::alpha_pow(const HElement& a, std::int64_t k) const {
  HElement r = a;
  for (; k > 0; --k) r = alpha(r);
  for (; k < 0; ++k) r = alpha_inv(r);
  return r;
}

std::vector<HElement> Family::window_A(const Window& w, std::size_t limit) const {
  std::vector<HElement> out;
  for (auto& h : window_elements(w, limit)) {
    if (in_A(h)) out.push_back(std::move(h));
  }
  return out;
}

std::optional<std::uint64_t> Family::torsion_order(const HElement& a, std::uint64_t limit) const {
  const HElement one = identity();
  HElement acc = a;
  for (std::uint64_t k = 1; k <= limit; ++k) {
    if (acc == one) return k;
    acc = multiply(acc, a);
  }
  return std::nullopt;
}

// --------------------------------------------------------------- Lamplighter

LamplighterFamily::LamplighterFamily(std::uint32_t q) : q_(q) {
  if (q < 2) throw std::invalid_argument("lamplighter: q must be >= 2");
}

const LampConfig& LamplighterFamily::lamps(const HElement& a) {
  if (const auto* c = std::get_if<LampConfig>(&a.value)) return *c;
  throw std::invalid_argument("lamplighter: element is not a lamp configuration");
}

nlohmann::json LamplighterFamily::config() const { return {{"family", "lamplighter"}, {"q", q_}}; }

HElement LamplighterFamily::multiply(const HElement& a, const HElement& b) const {
  return {lamps(a).plus(lamps(b), q_)};
}

HElement LamplighterFamily::invert(const HElement& a) const { return {lamps(a).negated(q_)}; }

HElement LamplighterFamily::alpha_pow(const HElement& a, std::int64_t k) const {
  return {lamps(a).shifted(k)};
}

bool LamplighterFamily::in_A(const HElement& a) const {
  const auto lo = lamps(a).min_position();
  return !lo || *lo >= 0;
}

ALength LamplighterFamily::a_length(const HElement& a) const {
  const auto& c = lamps(a);
  if (c.empty()) return ALength(0L);
  // A is a subgroup, so A^k = A for k >= 1.
  return *c.min_position() >= 0 ? ALength(1L) : ALength::infinite();
}

std::string LamplighterFamily::canonical_bytes(const HElement& a) const { return "L" + format(a); }

std::string LamplighterFamily::format(const HElement& a) const {
  std::string out = "[";
  bool first = true;
  for (const auto& [pos, val] : lamps(a).entries()) {
    if (!first) out += ';';
    first = false;
    out += std::to_string(pos) + ":" + std::to_string(val);
  }
  return out + "]";
}

HElement LamplighterFamily::parse_literal(std::string_view text) const {
  std::string s = text::trim(text);
  if (s.rfind("lamps:", 0) == 0) s = text::trim(s.substr(6));
  if (!s.empty() && (s.front() == '{' || s.front() == '[')) {
    const char close = s.front() == '{' ? '}' : ']';
    if (s.back() != close) throw std::invalid_argument("lamp literal: unbalanced brackets in '" + s + "'");
    s = text::trim(s.substr(1, s.size() - 2));
  }
  std::vector<LampConfig::Entry> entries;
  std::replace(s.begin(), s.end(), ';', ',');
  for (const auto& item : text::split_top_level(s, ',')) {
    const std::string t = text::trim(item);
    if (t.empty()) continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("lamp literal: expected pos:value, got '" + t + "'");
    std::string pos = text::trim(t.substr(0, colon));
    if (pos.size() >= 2 && pos.front() == '"' && pos.back() == '"') pos = pos.substr(1, pos.size() - 2);
    const std::int64_t p = text::parse_int(pos);
    const std::int64_t v = text::parse_int(t.substr(colon + 1));
    const std::int64_t r = ((v % static_cast<std::int64_t>(q_)) + q_) % q_;
    entries.emplace_back(p, static_cast<std::uint32_t>(r));
  }
  return {LampConfig::from_entries(std::move(entries), q_)};
}

nlohmann::json LamplighterFamily::to_json(const HElement& a) const {
  nlohmann::json lamp_map = nlohmann::json::object();
  for (const auto& [pos, val] : lamps(a).entries()) lamp_map[std::to_string(pos)] = val;
  return {{"lamps", lamp_map}};
}

HElement LamplighterFamily::from_json(const nlohmann::json& j) const {
  if (!j.is_object() || !j.contains("lamps") || !j["lamps"].is_object()) {
    throw std::invalid_argument("lamplighter element: expected {\"lamps\": {pos: value}}");
  }
  std::vector<LampConfig::Entry> entries;
  for (const auto& [pos, val] : j["lamps"].items()) {
    if (!val.is_number_integer()) throw std::invalid_argument("lamplighter element: non-integer lamp value");
    const std::int64_t v = val.get<std::int64_t>();
    entries.emplace_back(text::parse_int(pos), static_cast<std::uint32_t>(((v % q_) + q_) % q_));
  }
  return {LampConfig::from_entries(std::move(entries), q_)};
}

std::uint64_t LamplighterFamily::window_count(const Window& w) const {
  BigInt count = power(q_, static_cast<std::uint64_t>(w.lamp_hi - w.lamp_lo + 1));
  return count.fits_ulong_p() ? count.get_ui() : UINT64_MAX;
}

std::vector<HElement> LamplighterFamily::window_elements(const Window& w, std::size_t limit) const {
  const std::size_t width = static_cast<std::size_t>(w.lamp_hi - w.lamp_lo + 1);
  std::vector<std::uint32_t> digits(width, 0);
  std::vector<HElement> out;
  while (out.size() < limit) {
    std::vector<LampConfig::Entry> entries;
    for (std::size_t i = 0; i < width; ++i) {
      if (digits[i]) entries.emplace_back(w.lamp_lo + static_cast<std::int64_t>(i), digits[i]);
    }
    out.push_back({LampConfig::from_entries(std::move(entries), q_)});
    std::size_t i = 0;
    while (i < width && ++digits[i] == q_) digits[i++] = 0;
    if (i == width) break;
  }
  return out;
}

std::vector<HElement> LamplighterFamily::decompose_A(const HElement& a, std::size_t k) const {
  const ALength len = a_length(a);
  if (!len.is_finite() || BigInt(k) < len.value()) {
    throw std::invalid_argument("decompose_A: element is not a product of " + std::to_string(k) + " A-elements");
  }
  std::vector<HElement> out(k, identity());
  if (k > 0 && len.value() == 1) out[0] = a;
  return out;
}

// --------------------------------------------------------------------- NAdic

NAdicFamily::NAdicFamily(std::uint32_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("nadic: n must be >= 2");
}

const NAdicNumber& NAdicFamily::number(const HElement& a) {
  if (const auto* x = std::get_if<NAdicNumber>(&a.value)) return *x;
  throw std::invalid_argument("nadic: element is not an n-adic rational");
}

nlohmann::json NAdicFamily::config() const { return {{"family", "nadic"}, {"n", n_}}; }

HElement NAdicFamily::make(const mpq_class& value) const {
  mpq_class v = value;
  v.canonicalize();
  const BigInt den = v.get_den();
  for (std::uint32_t d = 0; d <= 4096; ++d) {
    const BigInt nd = power(n_, d);
    if (mpz_divisible_p(nd.get_mpz_t(), den.get_mpz_t())) {
      return {NAdicNumber::make(BigInt(v.get_num() * (nd / den)), d, n_)};
    }
  }
  throw std::invalid_argument("nadic: " + v.get_str() + " is not in Z[1/" + std::to_string(n_) + "]");
}

HElement NAdicFamily::multiply(const HElement& a, const HElement& b) const {
  const auto& x = number(a);
  const auto& y = number(b);
  const std::uint32_t d = std::max(x.den_pow(), y.den_pow());
  BigInt num = x.num() * power(n_, d - x.den_pow()) + y.num() * power(n_, d - y.den_pow());
  return {NAdicNumber::make(std::move(num), d, n_)};
}

HElement NAdicFamily::invert(const HElement& a) const {
  const auto& x = number(a);
  return {NAdicNumber::make(BigInt(-x.num()), x.den_pow(), n_)};
}

HElement NAdicFamily::alpha_pow(const HElement& a, std::int64_t k) const {
  const auto& x = number(a);
  if (k >= 0) return {NAdicNumber::make(x.num(), x.den_pow() + static_cast<std::uint32_t>(k), n_)};
  const std::uint64_t up = static_cast<std::uint64_t>(-k);
  if (up <= x.den_pow()) {
    return {NAdicNumber::make(x.num(), x.den_pow() - static_cast<std::uint32_t>(up), n_)};
  }
  return {NAdicNumber::make(BigInt(x.num() * power(n_, up - x.den_pow())), 0, n_)};
}

bool NAdicFamily::in_A(const HElement& a) const {
  const auto& x = number(a);
  return abs(x.num()) <= power(n_, x.den_pow());
}

ALength NAdicFamily::a_length(const HElement& a) const {
  // A = [-1, 1] is an interval containing 0, so A^k = [-k, k].
  const auto& x = number(a);
  BigInt q;
  const BigInt mag = abs(x.num());
  const BigInt den = power(n_, x.den_pow());
  mpz_cdiv_q(q.get_mpz_t(), mag.get_mpz_t(), den.get_mpz_t());
  return ALength(q);
}

std::string NAdicFamily::canonical_bytes(const HElement& a) const {
  const auto& x = number(a);
  return "N" + x.num().get_str() + "/" + std::to_string(x.den_pow());
}

std::string NAdicFamily::format(const HElement& a) const {
  const auto& x = number(a);
  if (x.den_pow() == 0) return x.num().get_str();
  return x.num().get_str() + "/" + power(n_, x.den_pow()).get_str();
}

HElement NAdicFamily::parse_literal(std::string_view text) const {
  std::string s = text::trim(text);
  if (!s.empty() && s.front() == '{' && s.back() == '}') s = text::trim(s.substr(1, s.size() - 2));
  if (s.find("num") != std::string::npos) {
    BigInt num;
    long den_pow = 0;
    for (const auto& item : text::split_top_level(s, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("nadic literal: bad field '" + item + "'");
      std::string key = text::trim(item.substr(0, colon));
      std::string val = text::trim(item.substr(colon + 1));
      auto unq = [](std::string v) {
        return (v.size() >= 2 && v.front() == '"' && v.back() == '"') ? v.substr(1, v.size() - 2) : v;
      };
      key = unq(key);
      val = unq(val);
      if (key == "num") {
        if (num.set_str(val, 10) != 0) throw std::invalid_argument("nadic literal: bad numerator '" + val + "'");
      } else if (key == "den_pow") {
        den_pow = static_cast<long>(text::parse_int(val));
        if (den_pow < 0) throw std::invalid_argument("nadic literal: negative den_pow");
      } else {
        throw std::invalid_argument("nadic literal: unknown field '" + key + "'");
      }
    }
    return {NAdicNumber::make(num, static_cast<std::uint32_t>(den_pow), n_)};
  }
  mpq_class q;
  if (s.empty() || q.set_str(s, 10) != 0) throw std::invalid_argument("nadic literal: bad rational '" + s + "'");
  return make(q);
}

nlohmann::json NAdicFamily::to_json(const HElement& a) const {
  const auto& x = number(a);
  return {{"num", x.num().get_str()}, {"den_pow", x.den_pow()}};
}

HElement NAdicFamily::from_json(const nlohmann::json& j) const {
  if (!j.is_object() || !j.contains("num") || !j.contains("den_pow")) {
    throw std::invalid_argument("nadic element: expected {\"num\": str, \"den_pow\": int}");
  }
  BigInt num;
  const std::string s = j["num"].is_string() ? j["num"].get<std::string>() : j["num"].dump();
  if (num.set_str(s, 10) != 0) throw std::invalid_argument("nadic element: bad numerator '" + s + "'");
  const auto dp = j["den_pow"].get<std::int64_t>();
  if (dp < 0) throw std::invalid_argument("nadic element: negative den_pow");
  return {NAdicNumber::make(num, static_cast<std::uint32_t>(dp), n_)};
}

std::uint64_t NAdicFamily::window_count(const Window& w) const {
  BigInt count = 2 * w.abs_bound * power(n_, w.den_pow) + 1;
  return count.fits_ulong_p() ? count.get_ui() : UINT64_MAX;
}

std::vector<HElement> NAdicFamily::window_elements(const Window& w, std::size_t limit) const {
  const BigInt top = w.abs_bound * power(n_, w.den_pow);
  std::vector<HElement> out;
  for (BigInt k = -top; k <= top && out.size() < limit; ++k) {
    out.push_back({NAdicNumber::make(k, w.den_pow, n_)});
  }
  return out;
}

std::vector<HElement> NAdicFamily::decompose_A(const HElement& a, std::size_t k) const {
  const BigInt len = a_length(a).value();
  if (BigInt(k) < len) {
    throw std::invalid_argument("decompose_A: element is not a product of " + std::to_string(k) + " A-elements");
  }
  std::vector<HElement> out(k, identity());
  if (len == 0) return out;
  const std::size_t ones = len.get_ui() - 1;
  const HElement unit = make(number(a).num() > 0 ? 1 : -1);
  HElement rest = a;
  for (std::size_t i = 0; i < ones; ++i) {
    out[i] = unit;
    rest = multiply(rest, invert(unit));
  }
  out[ones] = rest;
  return out;
}

bool NAdicFamily::parabolic_certificate(const HElement& a) const { return number(a).num() != 0; }

// ------------------------------------------------------------------- Product

ProductFamily::ProductFamily(FamilyPtr left, FamilyPtr right)
    : left_(std::move(left)), right_(std::move(right)) {
  if (!left_ || !right_) throw std::invalid_argument("product: missing factor");
}

const HElement& ProductFamily::left_of(const HElement& a) {
  const auto* p = std::get_if<ProductParts>(&a.value);
  if (!p || p->parts.size() != 2) throw std::invalid_argument("product: element is not a pair");
  return p->parts[0];
}

const HElement& ProductFamily::right_of(const HElement& a) {
  const auto* p = std::get_if<ProductParts>(&a.value);
  if (!p || p->parts.size() != 2) throw std::invalid_argument("product: element is not a pair");
  return p->parts[1];
}

nlohmann::json ProductFamily::config() const {
  return {{"family", "product"}, {"left", left_->config()}, {"right", right_->config()}};
}

HElement ProductFamily::identity() const { return pair(left_->identity(), right_->identity()); }

HElement ProductFamily::multiply(const HElement& a, const HElement& b) const {
  return pair(left_->multiply(left_of(a), left_of(b)), right_->multiply(right_of(a), right_of(b)));
}

HElement ProductFamily::invert(const HElement& a) const {
  return pair(left_->invert(left_of(a)), right_->invert(right_of(a)));
}

HElement ProductFamily::alpha(const HElement& a) const {
  return pair(left_->alpha(left_of(a)), right_->alpha(right_of(a)));
}

HElement ProductFamily::alpha_inv(const HElement& a) const {
  return pair(left_->alpha_inv(left_of(a)), right_->alpha_inv(right_of(a)));
}

HElement ProductFamily::alpha_pow(const HElement& a, std::int64_t k) const {
  return pair(left_->alpha_pow(left_of(a), k), right_->alpha_pow(right_of(a), k));
}

bool ProductFamily::in_A(const HElement& a) const {
  return left_->in_A(left_of(a)) && right_->in_A(right_of(a));
}

ALength ProductFamily::a_length(const HElement& a) const {
  // Both factors contain 1, so (A1 x A2)^k = A1^k x A2^k.
  const ALength l = left_->a_length(left_of(a));
  const ALength r = right_->a_length(right_of(a));
  return l < r ? r : l;
}

unsigned ProductFamily::n0() const { return std::max(left_->n0(), right_->n0()); }

bool ProductFamily::a_length_validated() const {
  return left_->a_length_validated() && right_->a_length_validated();
}

std::string ProductFamily::canonical_bytes(const HElement& a) const {
  return "P(" + left_->canonical_bytes(left_of(a)) + "|" + right_->canonical_bytes(right_of(a)) + ")";
}

std::string ProductFamily::format(const HElement& a) const {
  return "(" + left_->format(left_of(a)) + "|" + right_->format(right_of(a)) + ")";
}

HElement ProductFamily::parse_literal(std::string_view text) const {
  std::string s = text::trim(text);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  auto parts = text::split_top_level(s, '|');
  if (parts.size() != 2) throw std::invalid_argument("product literal: expected '<left>|<right>', got '" + s + "'");
  return pair(left_->parse_literal(parts[0]), right_->parse_literal(parts[1]));
}

nlohmann::json ProductFamily::to_json(const HElement& a) const {
  return {{"left", left_->to_json(left_of(a))}, {"right", right_->to_json(right_of(a))}};
}

HElement ProductFamily::from_json(const nlohmann::json& j) const {
  if (!j.is_object() || !j.contains("left") || !j.contains("right")) {
    throw std::invalid_argument("product element: expected {\"left\": .., \"right\": ..}");
  }
  return pair(left_->from_json(j["left"]), right_->from_json(j["right"]));
}

std::uint64_t ProductFamily::window_count(const Window& w) const {
  const BigInt c = BigInt(left_->window_count(w)) * BigInt(right_->window_count(w));
  return c.fits_ulong_p() ? c.get_ui() : UINT64_MAX;
}

std::vector<HElement> ProductFamily::window_elements(const Window& w, std::size_t limit) const {
  const auto ls = left_->window_elements(w, limit);
  const auto rs = right_->window_elements(w, limit);
  std::vector<HElement> out;
  for (const auto& l : ls) {
    for (const auto& r : rs) {
      if (out.size() >= limit) return out;
      out.push_back(pair(l, r));
    }
  }
  return out;
}

std::vector<HElement> ProductFamily::decompose_A(const HElement& a, std::size_t k) const {
  const auto ls = left_->decompose_A(left_of(a), k);
  const auto rs = right_->decompose_A(right_of(a), k);
  std::vector<HElement> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pair(ls[i], rs[i]));
  return out;
}

std::uint64_t ProductFamily::compaction_index() const {
  return left_->compaction_index() * right_->compaction_index();
}

bool ProductFamily::parabolic_certificate(const HElement& a) const {
  return left_->parabolic_certificate(left_of(a)) || right_->parabolic_certificate(right_of(a));
}

// ------------------------------------------------------------ IdentityAlpha

IdentityAlphaFamily::IdentityAlphaFamily(FamilyPtr base) : base_(std::move(base)) {
  if (!base_) throw std::invalid_argument("identity_alpha: missing base family");
}

nlohmann::json IdentityAlphaFamily::config() const {
  return {{"family", "identity_alpha"}, {"base", base_->config()}};
}

std::uint64_t IdentityAlphaFamily::compaction_index() const {
  throw UnsupportedOperation("compaction_index: identity_alpha has no counting surrogate");
}

// ------------------------------------------------------------------ Factory

namespace {

std::uint32_t positive_param(const nlohmann::json& config, const char* key) {
  if (!config.contains(key) || !config[key].is_number_integer()) {
    throw std::invalid_argument(std::string("family config: missing integer '") + key + "'");
  }
  const auto v = config[key].get<std::int64_t>();
  if (v < 2 || v > 1'000'000) {
    throw std::invalid_argument(std::string("family config: '") + key + "' must be in [2, 10^6]");
  }
  return static_cast<std::uint32_t>(v);
}

nlohmann::json shorthand_to_json(std::string_view spec) {
  const std::string s = text::trim(spec);
  const auto paren = s.find('(');
  if (paren != std::string::npos) {
    if (s.back() != ')') throw std::invalid_argument("family: unbalanced parentheses in '" + s + "'");
    const std::string head = text::trim(s.substr(0, paren));
    const auto args = text::split_top_level(s.substr(paren + 1, s.size() - paren - 2), ',');
    if (head == "product" && args.size() == 2) {
      return {{"family", "product"}, {"left", shorthand_to_json(args[0])}, {"right", shorthand_to_json(args[1])}};
    }
    if (head == "identity_alpha" && args.size() == 1) {
      return {{"family", "identity_alpha"}, {"base", shorthand_to_json(args[0])}};
    }
    throw std::invalid_argument("family: unknown form '" + s + "'");
  }
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("family: expected name:param, got '" + s + "'");
  const std::string head = text::trim(s.substr(0, colon));
  const std::int64_t param = text::parse_int(s.substr(colon + 1));
  if (head == "lamplighter") return {{"family", "lamplighter"}, {"q", param}};
  if (head == "nadic") return {{"family", "nadic"}, {"n", param}};
  throw std::invalid_argument("family: unknown family '" + head + "'");
}

}  // namespace

FamilyPtr make_family(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("family") || !config["family"].is_string()) {
    throw std::invalid_argument("family config: expected an object with a \"family\" name");
  }
  const std::string name = config["family"].get<std::string>();
  if (name == "lamplighter") return std::make_shared<LamplighterFamily>(positive_param(config, "q"));
  if (name == "nadic") return std::make_shared<NAdicFamily>(positive_param(config, "n"));
  if (name == "product") {
    if (!config.contains("left") || !config.contains("right")) {
      throw std::invalid_argument("family config: product needs left and right");
    }
    return std::make_shared<ProductFamily>(make_family(config["left"]), make_family(config["right"]));
  }
  if (name == "identity_alpha") {
    if (!config.contains("base")) throw std::invalid_argument("family config: identity_alpha needs base");
    return std::make_shared<IdentityAlphaFamily>(make_family(config["base"]));
  }
  throw std::invalid_argument("family config: unknown family '" + name + "'");
}

FamilyPtr parse_family(std::string_view spec) {
  const std::string s = text::trim(spec);
  if (!s.empty() && s.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(s);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(std::string("family: malformed JSON: ") + e.what());
    }
    return make_family(j);
  }
  return make_family(shorthand_to_json(s));
}

// ------------------------------------------------------------ Verification

nlohmann::json ConfiningReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj = {{"name", c.name}, {"pass", c.pass}, {"checked", c.checked}};
    if (c.counterexample) cj["counterexample"] = *c.counterexample;
    checks_json.push_back(cj);
  }
  nlohmann::json j = {{"pass", pass},
                      {"complete", complete},
                      {"window", window.to_json()},
                      {"n0", n0},
                      {"exhaust_depth", exhaust_depth},
                      {"checks", checks_json}};
  j["strictness_witness"] = strictness_witness ? nlohmann::json(*strictness_witness) : nlohmann::json();
  return j;
}

ConfiningReport verify_confining(const Family& family, const Window& window, unsigned exhaust_depth,
                                 std::size_t enumeration_bound) {
  ConfiningReport report;
  report.window = window;
  report.n0 = family.n0();
  report.exhaust_depth = exhaust_depth;
  if (family.window_count(window) > enumeration_bound) report.complete = false;

  const auto hs = family.window_elements(window, enumeration_bound);
  std::vector<HElement> as;
  for (const auto& h : hs) {
    if (family.in_A(h)) as.push_back(h);
  }

  AxiomCheck symmetric;
  symmetric.name = "A symmetric and contains 1";
  if (!family.in_A(family.identity())) {
    symmetric.pass = false;
    symmetric.counterexample = "identity not in A";
  }
  for (const auto& a : as) {
    ++symmetric.checked;
    if (symmetric.pass && !family.in_A(family.invert(a))) {
      symmetric.pass = false;
      symmetric.counterexample = family.format(a);
    }
  }

  AxiomCheck stable;
  stable.name = "alpha(A) strictly inside A";
  for (const auto& a : as) {
    ++stable.checked;
    if (stable.pass && !family.in_A(family.alpha(a))) {
      stable.pass = false;
      stable.counterexample = family.format(a) + " maps outside A";
    }
    if (!report.strictness_witness && !family.in_A(family.alpha_inv(a))) {
      report.strictness_witness = family.format(a);
    }
  }
  if (stable.pass && !report.strictness_witness) {
    stable.pass = false;
    stable.counterexample = "alpha(A) = A on the window (no element of A outside alpha(A))";
  }

  AxiomCheck exhausts;
  exhausts.name = "H = union of alpha^-m(A)";
  for (const auto& h : hs) {
    ++exhausts.checked;
    bool reached = false;
    HElement x = h;
    for (unsigned m = 0; m <= exhaust_depth; ++m) {
      if (family.in_A(x)) {
        reached = true;
        break;
      }
      x = family.alpha(x);
    }
    if (!reached && exhausts.pass) {
      exhausts.pass = false;
      exhausts.counterexample = family.format(h) + " not in A after " + std::to_string(exhaust_depth) + " steps";
    }
  }

  AxiomCheck products;
  products.name = "alpha^n0(A.A) inside A";
  for (std::size_t i = 0; i < as.size() && products.pass; ++i) {
    for (std::size_t j = 0; j < as.size(); ++j) {
      if (products.checked >= enumeration_bound) {
        report.complete = false;
        break;
      }
      ++products.checked;
      const HElement p = family.alpha_pow(family.multiply(as[i], as[j]), family.n0());
      if (!family.in_A(p)) {
        products.pass = false;
        products.counterexample = family.format(as[i]) + " * " + family.format(as[j]);
        break;
      }
    }
  }

  report.checks = {symmetric, stable, exhausts, products};
  for (const auto& c : report.checks) report.pass = report.pass && c.pass;
  return report;
}

std::optional<std::size_t> ALengthOracle::lookup(const Family& family, const HElement& h) const {
  auto it = length_by_key.find(family.canonical_bytes(h));
  if (it == length_by_key.end()) return std::nullopt;
  return it->second;
}

ALengthOracle a_length_oracle(const Family& family, const Window& window, std::size_t max_k,
                              std::size_t limit) {
  ALengthOracle oracle;
  oracle.max_k = max_k;
  const auto as = family.window_A(window, limit);
  std::vector<HElement> frontier{family.identity()};
  oracle.length_by_key.emplace(family.canonical_bytes(frontier.front()), 0);
  for (std::size_t k = 1; k <= max_k && !frontier.empty(); ++k) {
    std::vector<HElement> next;
    for (const auto& x : frontier) {
      for (const auto& a : as) {
        HElement y = family.multiply(x, a);
        if (oracle.length_by_key.emplace(family.canonical_bytes(y), k).second) {
          next.push_back(std::move(y));
          if (oracle.length_by_key.size() > limit) {
            throw std::length_error("a_length_oracle: more than " + std::to_string(limit) + " elements");
          }
        }
      }
    }
    frontier = std::move(next);
  }
  return oracle;
}

std::uint64_t windowed_coset_count(const Family& family, const Window& window) {
  const auto as = family.window_A(window, 1u << 20);
  std::vector<HElement> reps;
  for (const auto& a : as) {
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](const HElement& r) {
      return family.in_A(family.alpha_inv(family.multiply(family.invert(r), a)));
    });
    if (!seen) reps.push_back(a);
  }
  return reps.size();
}

}  // namespace focal
