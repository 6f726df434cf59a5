#pragma once

// Systematic binary block codes for memory words: SECDED (extended Hamming),
// DECTED (two-error BCH plus overall parity) and FaECC, which is SECDED whose
// double-error syndromes can be resolved once the location of a stuck cell is
// known.
//
// Codeword layout (all modes): positions [0, k) hold data, [k, n-1) hold the
// check bits, n-1 holds the overall parity. Syndrome bit r is row r of H; the
// last row is the all-ones parity row.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "faecc/error.hpp"

namespace faecc::ecc {

using Bits = std::vector<std::uint8_t>;  // one 0/1 value per element

enum class Mode { SECDED, DECTED, FAECC };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::SECDED: return "SECDED";
    case Mode::DECTED: return "DECTED";
    case Mode::FAECC: return "FAECC";
  }
  return "?";
}

// Primitive polynomials (bit i = coefficient of x^i) used for GF(2^deg).
// deg 8 is x^8 + x^4 + x^3 + x^2 + 1.
inline std::uint32_t primitive_polynomial(int deg) {
  static constexpr std::array<std::uint32_t, 17> table{
      0,       0,       0x7,     0xB,     0x13,    0x25,    0x43,    0x89,   0x11D,
      0x211,   0x409,   0x805,   0x1053,  0x201B,  0x4443,  0x8003,  0x1100B};
  if (deg < 2 || deg > 16) throw InvalidArgument("no primitive polynomial for degree " + std::to_string(deg));
  return table[static_cast<std::size_t>(deg)];
}

// GF(2^deg) with log/antilog tables.
class GaloisField {
 public:
  explicit GaloisField(int deg) : deg_(deg), order_((1u << deg) - 1) {
    const std::uint32_t poly = primitive_polynomial(deg);
    exp_.resize(2 * order_);
    log_.assign(order_ + 1, -1);
    std::uint32_t x = 1;
    for (std::uint32_t i = 0; i < order_; ++i) {
      if (i > 0 && x == 1) throw InvalidArgument("polynomial for degree " + std::to_string(deg) + " is not primitive");
      exp_[i] = x;
      log_[x] = static_cast<int>(i);
      x <<= 1;
      if (x & (1u << deg)) x ^= poly;
    }
    if (x != 1) throw InvalidArgument("polynomial for degree " + std::to_string(deg) + " is not primitive");
    for (std::uint32_t i = order_; i < 2 * order_; ++i) exp_[i] = exp_[i - order_];
  }

  int degree() const { return deg_; }
  std::uint32_t order() const { return order_; }
  std::uint32_t alpha_pow(std::uint64_t e) const { return exp_[e % order_]; }
  int log(std::uint32_t x) const { return x == 0 ? -1 : log_[x]; }

  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[static_cast<std::uint32_t>(log_[a] + log_[b])];
  }
  std::uint32_t div(std::uint32_t a, std::uint32_t b) const {
    if (b == 0) throw InvalidArgument("GF division by zero");
    if (a == 0) return 0;
    return exp_[static_cast<std::uint32_t>(log_[a] - log_[b] + static_cast<int>(order_))];
  }

 private:
  int deg_;
  std::uint32_t order_;
  std::vector<std::uint32_t> exp_;
  std::vector<int> log_;
};

struct Syndrome {
  std::uint64_t bits = 0;
  int width = 0;

  bool zero() const { return bits == 0; }
  bool bit(int r) const { return (bits >> r) & 1u; }
  friend bool operator==(const Syndrome&, const Syndrome&) = default;
};

enum class DecodeStatus { Clean, CorrectedSingle, DoubleDetected, CorrectedDouble, Uncorrectable };

inline std::string to_string(DecodeStatus s) {
  switch (s) {
    case DecodeStatus::Clean: return "Clean";
    case DecodeStatus::CorrectedSingle: return "CorrectedSingle";
    case DecodeStatus::DoubleDetected: return "DoubleDetected";
    case DecodeStatus::CorrectedDouble: return "CorrectedDouble";
    case DecodeStatus::Uncorrectable: return "Uncorrectable";
  }
  return "?";
}

struct DecodeOutcome {
  DecodeStatus status = DecodeStatus::Uncorrectable;
  std::vector<std::size_t> positions;  // flipped by the decoder, ascending
  Bits codeword;                       // corrected codeword (empty if not recovered)
  Bits data;                           // k data bits (empty if not recovered)

  bool recovered() const {
    return status == DecodeStatus::Clean || status == DecodeStatus::CorrectedSingle ||
           status == DecodeStatus::CorrectedDouble;
  }
};

class EccScheme {
 public:
  // Builds the (k, n) code for `mode`. SECDED/FAECC use deg Hamming check
  // bits, DECTED uses 2*deg BCH check bits; all add one overall parity bit.
  static EccScheme build(int deg, std::size_t k, Mode mode) {
    if (deg < 2 || deg > 16) throw InvalidArgument("build_scheme: deg must be in [2, 16]");
    if (k < 1) throw InvalidArgument("build_scheme: k must be >= 1");
    const std::size_t full = (std::size_t{1} << deg) - 1;
    EccScheme s;
    s.deg_ = deg;
    s.k_ = k;
    s.mode_ = mode;
    if (mode == Mode::DECTED) {
      if (deg < 3 || k + 2 * static_cast<std::size_t>(deg) > full)
        throw InvalidArgument("build_scheme: DECTED needs k <= 2^deg - 2*deg - 1 (deg " + std::to_string(deg) + ")");
      s.r_ = 2 * static_cast<std::size_t>(deg) + 1;
      s.n_ = k + s.r_;
      s.build_bch();
    } else {
      if (k + static_cast<std::size_t>(deg) > full)
        throw InvalidArgument("build_scheme: SECDED needs k <= 2^deg - deg - 1 (deg " + std::to_string(deg) + ")");
      s.r_ = static_cast<std::size_t>(deg) + 1;
      s.n_ = k + s.r_;
      s.build_hamming();
    }
    s.build_generator();
    for (std::size_t i = 0; i < s.n_; ++i) {
      if (!s.column_index_.emplace(s.columns_[i], static_cast<std::uint32_t>(i)).second)
        throw InvalidArgument("build_scheme: duplicate parity-check column");
    }
    return s;
  }

  int deg() const { return deg_; }
  std::size_t k() const { return k_; }
  std::size_t n() const { return n_; }
  std::size_t check_bits() const { return r_; }  // n - k, including overall parity
  Mode mode() const { return mode_; }
  std::size_t parity_position() const { return n_ - 1; }
  // Maximum number of hard faults per word the scheme can mask.
  std::size_t hard_fault_capacity() const { return mode_ == Mode::SECDED ? 1 : 2; }

  std::uint64_t column(std::size_t pos) const { return columns_.at(pos); }
  std::optional<std::size_t> position_of_column(std::uint64_t col) const {
    const auto it = column_index_.find(col);
    if (it == column_index_.end()) return std::nullopt;
    return it->second;
  }
  // Check-bit pattern (positions k..n-1 packed into bits 0..r-1) produced by
  // data bit d.
  std::uint64_t data_check_bits(std::size_t d) const { return data_check_.at(d); }
  const GaloisField* field() const { return field_ ? &*field_ : nullptr; }
  // BCH exponent of a position, or -1 for the overall parity bit.
  int exponent_of(std::size_t pos) const { return exponent_.empty() ? -1 : exponent_.at(pos); }
  std::optional<std::size_t> position_of_exponent(std::uint32_t e) const {
    if (e >= position_of_exponent_.size() || position_of_exponent_[e] < 0) return std::nullopt;
    return static_cast<std::size_t>(position_of_exponent_[e]);
  }

  std::vector<Bits> generator_matrix() const {
    std::vector<Bits> g(k_, Bits(n_, 0));
    for (std::size_t d = 0; d < k_; ++d) {
      g[d][d] = 1;
      for (std::size_t c = 0; c < r_; ++c) g[d][k_ + c] = (data_check_[d] >> c) & 1u;
    }
    return g;
  }

  std::vector<Bits> parity_check_matrix() const {
    std::vector<Bits> h(r_, Bits(n_, 0));
    for (std::size_t row = 0; row < r_; ++row)
      for (std::size_t pos = 0; pos < n_; ++pos) h[row][pos] = (columns_[pos] >> row) & 1u;
    return h;
  }

 private:
  EccScheme() = default;

  // Hamming columns: check position k+i gets unit vector e_i, data bits take
  // the weight>=2 values of GF(2^deg) in increasing order; every column also
  // carries the parity row.
  void build_hamming() {
    const std::uint64_t parity_row = std::uint64_t{1} << deg_;
    columns_.assign(n_, 0);
    std::uint64_t v = 0;
    for (std::size_t d = 0; d < k_; ++d) {
      do ++v;
      while (std::popcount(v) < 2);
      columns_[d] = v | parity_row;
    }
    for (int i = 0; i < deg_; ++i) columns_[k_ + static_cast<std::size_t>(i)] = (std::uint64_t{1} << i) | parity_row;
    columns_[n_ - 1] = parity_row;
  }

  // BCH(t=2) columns (alpha^e, alpha^{3e}, 1). Check bits occupy exponents
  // 0..2deg-1 (consecutive, hence independent), data bits follow.
  void build_bch() {
    field_.emplace(deg_);
    const std::uint64_t parity_row = std::uint64_t{1} << (2 * deg_);
    const std::size_t nbch = n_ - 1;
    columns_.assign(n_, 0);
    exponent_.assign(n_, -1);
    position_of_exponent_.assign(field_->order(), -1);
    for (std::size_t pos = 0; pos < nbch; ++pos) {
      const std::size_t e = pos < k_ ? 2 * static_cast<std::size_t>(deg_) + pos : pos - k_;
      exponent_[pos] = static_cast<int>(e);
      position_of_exponent_[e] = static_cast<int>(pos);
      columns_[pos] = field_->alpha_pow(e) | (std::uint64_t{field_->alpha_pow(3 * e)} << deg_) | parity_row;
    }
    columns_[n_ - 1] = parity_row;
  }

  // Solves A_check * p = col_d over GF(2) for every data column.
  void build_generator() {
    const std::size_t r = r_;
    // Row-major augmented matrix [A_check | I], rows packed in two words.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rows(r);
    for (std::size_t row = 0; row < r; ++row) {
      std::uint64_t a = 0;
      for (std::size_t c = 0; c < r; ++c) a |= ((columns_[k_ + c] >> row) & 1u) << c;
      rows[row] = {a, std::uint64_t{1} << row};
    }
    for (std::size_t col = 0; col < r; ++col) {
      std::size_t piv = col;
      while (piv < r && !((rows[piv].first >> col) & 1u)) ++piv;
      if (piv == r) throw InvalidArgument("build_scheme: check columns are singular");
      std::swap(rows[piv], rows[col]);
      for (std::size_t row = 0; row < r; ++row) {
        if (row != col && ((rows[row].first >> col) & 1u)) {
          rows[row].first ^= rows[col].first;
          rows[row].second ^= rows[col].second;
        }
      }
    }
    // rows[i].second is row i of A_check^{-1}.
    data_check_.assign(k_, 0);
    for (std::size_t d = 0; d < k_; ++d) {
      std::uint64_t p = 0;
      for (std::size_t i = 0; i < r; ++i) p |= std::uint64_t(std::popcount(rows[i].second & columns_[d]) & 1) << i;
      data_check_[d] = p;
    }
  }

  int deg_ = 0;
  std::size_t k_ = 0, n_ = 0, r_ = 0;
  Mode mode_ = Mode::SECDED;
  std::vector<std::uint64_t> columns_;
  std::vector<std::uint64_t> data_check_;
  std::unordered_map<std::uint64_t, std::uint32_t> column_index_;
  std::optional<GaloisField> field_;
  std::vector<int> exponent_;
  std::vector<int> position_of_exponent_;
};

inline EccScheme build_scheme(int deg, std::size_t k, Mode mode) { return EccScheme::build(deg, k, mode); }

inline Bits encode(const EccScheme& s, std::span<const std::uint8_t> data) {
  if (data.size() != s.k())
    throw InvalidArgument("encode: expected " + std::to_string(s.k()) + " data bits, got " + std::to_string(data.size()));
  Bits cw(s.n(), 0);
  std::uint64_t check = 0;
  for (std::size_t d = 0; d < s.k(); ++d) {
    cw[d] = data[d] & 1u;
    if (cw[d]) check ^= s.data_check_bits(d);
  }
  for (std::size_t c = 0; c < s.check_bits(); ++c) cw[s.k() + c] = (check >> c) & 1u;
  return cw;
}

inline Syndrome syndrome(const EccScheme& s, std::span<const std::uint8_t> cw) {
  if (cw.size() != s.n()) throw InvalidArgument("syndrome: codeword length mismatch");
  std::uint64_t z = 0;
  for (std::size_t i = 0; i < cw.size(); ++i)
    if (cw[i] & 1u) z ^= s.column(i);
  return {z, static_cast<int>(s.check_bits())};
}

namespace detail {

inline DecodeOutcome recovered(const EccScheme& s, std::span<const std::uint8_t> cw, DecodeStatus status,
                               std::vector<std::size_t> flips) {
  DecodeOutcome out;
  out.status = status;
  std::sort(flips.begin(), flips.end());
  out.positions = std::move(flips);
  out.codeword.assign(cw.begin(), cw.end());
  for (std::size_t p : out.positions) out.codeword[p] ^= 1u;
  out.data.assign(out.codeword.begin(), out.codeword.begin() + static_cast<std::ptrdiff_t>(s.k()));
  return out;
}

inline DecodeOutcome failed(DecodeStatus status) {
  DecodeOutcome out;
  out.status = status;
  return out;
}

}  // namespace detail

// Extended-Hamming decoding: odd overall parity means a single error whose
// column equals the syndrome; even parity with a nonzero syndrome means two.
inline DecodeOutcome decode_secded(const EccScheme& s, std::span<const std::uint8_t> cw) {
  if (s.mode() == Mode::DECTED) throw InvalidArgument("decode_secded: scheme is DECTED");
  const Syndrome z = syndrome(s, cw);
  if (z.zero()) return detail::recovered(s, cw, DecodeStatus::Clean, {});
  if (!z.bit(z.width - 1)) return detail::failed(DecodeStatus::DoubleDetected);
  if (const auto pos = s.position_of_column(z.bits)) return detail::recovered(s, cw, DecodeStatus::CorrectedSingle, {*pos});
  return detail::failed(DecodeStatus::Uncorrectable);
}

// Direct (Peterson) decoding of the two-error BCH code plus parity.
inline DecodeOutcome decode_dected(const EccScheme& s, std::span<const std::uint8_t> cw) {
  if (s.mode() != Mode::DECTED) throw InvalidArgument("decode_dected: scheme is not DECTED");
  const GaloisField& gf = *s.field();
  const int deg = s.deg();
  const Syndrome z = syndrome(s, cw);
  const std::uint64_t mask = (std::uint64_t{1} << deg) - 1;
  const auto s1 = static_cast<std::uint32_t>(z.bits & mask);
  const auto s3 = static_cast<std::uint32_t>((z.bits >> deg) & mask);
  const bool odd = z.bit(2 * deg);
  const std::size_t parity = s.parity_position();

  if (s1 == 0 && s3 == 0) {
    if (!odd) return detail::recovered(s, cw, DecodeStatus::Clean, {});
    return detail::recovered(s, cw, DecodeStatus::CorrectedSingle, {parity});
  }
  if (s1 == 0) return detail::failed(DecodeStatus::Uncorrectable);

  const std::uint32_t s1_cubed = gf.mul(s1, gf.mul(s1, s1));
  if (s3 == s1_cubed) {
    const auto pos = s.position_of_exponent(static_cast<std::uint32_t>(gf.log(s1)));
    if (!pos) return detail::failed(DecodeStatus::Uncorrectable);
    if (odd) return detail::recovered(s, cw, DecodeStatus::CorrectedSingle, {*pos});
    return detail::recovered(s, cw, DecodeStatus::CorrectedDouble, {*pos, parity});
  }
  if (odd) return detail::failed(DecodeStatus::Uncorrectable);  // three errors detected

  // Error locators X1, X2 are the roots of X^2 + S1 X + (S3 + S1^3) / S1.
  const std::uint32_t c = gf.div(s3 ^ s1_cubed, s1);
  std::vector<std::size_t> roots;
  for (std::size_t pos = 0; pos + 1 < s.n(); ++pos) {
    const std::uint32_t x = gf.alpha_pow(static_cast<std::uint64_t>(s.exponent_of(pos)));
    if ((gf.mul(x, x) ^ gf.mul(s1, x) ^ c) == 0) roots.push_back(pos);
  }
  if (roots.size() != 2) return detail::failed(DecodeStatus::Uncorrectable);
  return detail::recovered(s, cw, DecodeStatus::CorrectedDouble, roots);
}

inline DecodeOutcome decode(const EccScheme& s, std::span<const std::uint8_t> cw) {
  return s.mode() == Mode::DECTED ? decode_dected(s, cw) : decode_secded(s, cw);
}

// All position pairs {i, j} whose two-bit error pattern yields syndrome z.
// Columns are distinct, so each position appears in at most one pair.
inline std::vector<std::pair<std::size_t, std::size_t>> double_error_candidates(const EccScheme& s, Syndrome z) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (z.zero()) return out;
  for (std::size_t i = 0; i < s.n(); ++i) {
    const auto j = s.position_of_column(z.bits ^ s.column(i));
    if (j && *j > i) out.emplace_back(i, *j);
  }
  return out;
}

// Positions that did not change when the inverted word was written back:
// those cells are stuck.
inline std::vector<std::size_t> locate_stuck_bits(std::span<const std::uint8_t> read_1,
                                                  std::span<const std::uint8_t> read_2_of_inverted) {
  if (read_1.size() != read_2_of_inverted.size()) throw InvalidArgument("locate_stuck_bits: length mismatch");
  std::vector<std::size_t> stuck;
  for (std::size_t i = 0; i < read_1.size(); ++i)
    if ((read_1[i] & 1u) == (read_2_of_inverted[i] & 1u)) stuck.push_back(i);
  return stuck;
}

// Resolves a SECDED double-error syndrome with erasure information: exactly
// one candidate pair may contain a located stuck cell. Words that are not
// double-error detections are decoded as plain SECDED and the probe result
// is ignored.
inline DecodeOutcome resolve_double_with_erasure(const EccScheme& s, std::span<const std::uint8_t> cw,
                                                 std::span<const std::size_t> stuck_positions) {
  if (s.mode() == Mode::DECTED) throw InvalidArgument("resolve_double_with_erasure: scheme is DECTED");
  DecodeOutcome first = decode_secded(s, cw);
  if (first.status != DecodeStatus::DoubleDetected) return first;
  if (stuck_positions.empty()) return detail::failed(DecodeStatus::Uncorrectable);

  const auto candidates = double_error_candidates(s, syndrome(s, cw));
  const auto is_stuck = [&](std::size_t p) {
    return std::find(stuck_positions.begin(), stuck_positions.end(), p) != stuck_positions.end();
  };
  const std::pair<std::size_t, std::size_t>* chosen = nullptr;
  for (const auto& c : candidates) {
    if (!is_stuck(c.first) && !is_stuck(c.second)) continue;
    if (chosen) return detail::failed(DecodeStatus::Uncorrectable);  // stuck cells in two pairs: > 2 errors
    chosen = &c;
  }
  if (!chosen) return detail::failed(DecodeStatus::Uncorrectable);
  return detail::recovered(s, cw, DecodeStatus::CorrectedDouble, {chosen->first, chosen->second});
}

// Plain-text dump: one row of 0/1 characters per line.
inline void write_matrix(std::ostream& os, const std::vector<Bits>& rows) {
  for (const auto& row : rows) {
    for (auto b : row) os << (b ? '1' : '0');
    os << '\n';
  }
}

}  // namespace faecc::ecc
