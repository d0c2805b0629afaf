#pragma once

// Exact integer multiset algebra for sum, difference and fourth-order
// co-arrays, plus hole analysis of the resulting lag sets.

#include <algorithm>
#include <array>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fogna/errors.hpp"
#include "fogna/geometry.hpp"

namespace fogna {

using Lag = std::int64_t;
/// Sorted set of distinct integers.
using LagSet = std::vector<Lag>;

enum class CoarrayKind { Sca, Dca, Foca1, Foca2, Foca3, Foeca };

inline std::string to_string(CoarrayKind k) {
  switch (k) {
    case CoarrayKind::Sca: return "SCA";
    case CoarrayKind::Dca: return "DCA";
    case CoarrayKind::Foca1: return "FOCA1";
    case CoarrayKind::Foca2: return "FOCA2";
    case CoarrayKind::Foca3: return "FOCA3";
    case CoarrayKind::Foeca: return "FOECA";
  }
  return "?";
}

/// Fourth-order cumulant case. The sign pattern applied to (p1, p2, p3, p4)
/// determines the virtual position of each ordered quadruple.
enum class FocCase : std::uint8_t { One = 1, Two = 2, Three = 3 };

inline constexpr std::array<FocCase, 3> kAllFocCases = {FocCase::One, FocCase::Two, FocCase::Three};

inline constexpr std::array<int, 4> sign_pattern(FocCase c) {
  switch (c) {
    case FocCase::One: return {+1, +1, +1, -1};
    case FocCase::Two: return {+1, -1, +1, -1};
    case FocCase::Three: return {-1, -1, -1, +1};
  }
  return {0, 0, 0, 0};
}

/// One ordered index quadruple (l1..l4 into the physical array) and its case.
struct Generator {
  FocCase foc_case;
  std::array<std::uint16_t, 4> idx;

  /// Row-major position in a vectorised N^4 cumulant tensor.
  std::size_t flat(std::size_t n) const {
    return ((static_cast<std::size_t>(idx[0]) * n + idx[1]) * n + idx[2]) * n + idx[3];
  }
};

class LagMultiset {
 public:
  using Counts = std::map<Lag, std::uint64_t>;
  using GeneratorMap = std::map<Lag, std::vector<Generator>>;

  LagMultiset() = default;
  LagMultiset(CoarrayKind kind, Counts counts) : kind_(kind), counts_(std::move(counts)) {}

  CoarrayKind kind() const { return kind_; }
  const Counts& entries() const { return counts_; }

  std::uint64_t multiplicity(Lag lag) const {
    auto it = counts_.find(lag);
    return it == counts_.end() ? 0 : it->second;
  }
  bool contains(Lag lag) const { return counts_.count(lag) != 0; }
  bool empty() const { return counts_.empty(); }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [lag, m] : counts_) t += m;
    return t;
  }

  LagSet underlying_set() const {
    LagSet out;
    out.reserve(counts_.size());
    for (const auto& [lag, m] : counts_) out.push_back(lag);
    return out;
  }

  Lag min_lag() const { return counts_.begin()->first; }
  Lag max_lag() const { return counts_.rbegin()->first; }

  bool has_generators() const { return generators_.has_value(); }
  const GeneratorMap& generators() const {
    if (!generators_) throw PreconditionError("multiset was built without generators");
    return *generators_;
  }
  void set_generators(GeneratorMap g) { generators_ = std::move(g); }

  /// Multiset of negated elements.
  LagMultiset negated() const {
    Counts c;
    for (const auto& [lag, m] : counts_) c[-lag] = m;
    return LagMultiset(kind_, std::move(c));
  }

  /// Bag sum: multiplicities add. Generators are merged when both sides carry them.
  friend LagMultiset bag_sum(const LagMultiset& a, const LagMultiset& b, CoarrayKind kind) {
    Counts c = a.counts_;
    for (const auto& [lag, m] : b.counts_) c[lag] += m;
    LagMultiset out(kind, std::move(c));
    if (a.generators_ && b.generators_) {
      GeneratorMap g = *a.generators_;
      for (const auto& [lag, list] : *b.generators_) {
        auto& dst = g[lag];
        dst.insert(dst.end(), list.begin(), list.end());
      }
      out.generators_ = std::move(g);
    }
    return out;
  }

  bool same_counts(const LagMultiset& other) const { return counts_ == other.counts_; }

 private:
  CoarrayKind kind_ = CoarrayKind::Dca;
  Counts counts_;
  std::optional<GeneratorMap> generators_;
};

// ---------------------------------------------------------------------------
// Set algebra

inline LagSet make_set(std::vector<Lag> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline LagSet negate(const LagSet& a) {
  LagSet out(a.rbegin(), a.rend());
  for (auto& x : out) x = -x;
  return out;
}

inline LagSet set_union(const LagSet& a, const LagSet& b) {
  LagSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

/// {a + b : a in A, b in B}
inline LagSet cross_sum(const LagSet& a, const LagSet& b) {
  std::vector<Lag> out;
  out.reserve(a.size() * b.size());
  for (Lag x : a)
    for (Lag y : b) out.push_back(x + y);
  return make_set(std::move(out));
}

inline LagSet range_set(Lag lo, Lag hi) {
  LagSet out;
  for (Lag x = lo; x <= hi; ++x) out.push_back(x);
  return out;
}

inline LagSet to_lag_set(const SensorArray& s) { return LagSet(s.positions().begin(), s.positions().end()); }

// ---------------------------------------------------------------------------
// Co-array constructions

namespace detail {

// Dense accumulator over [lo, hi] converted to a sparse map at the end.
class DenseCounter {
 public:
  DenseCounter(Lag lo, Lag hi) : lo_(lo), counts_(static_cast<std::size_t>(hi - lo + 1), 0) {}
  void add(Lag lag) { ++counts_[static_cast<std::size_t>(lag - lo_)]; }
  LagMultiset::Counts to_map() const {
    LagMultiset::Counts out;
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (counts_[i]) out.emplace_hint(out.end(), lo_ + static_cast<Lag>(i), counts_[i]);
    return out;
  }

 private:
  Lag lo_;
  std::vector<std::uint64_t> counts_;
};

}  // namespace detail

inline LagMultiset sum_coarray(const SensorArray& s) {
  const auto p = s.positions();
  detail::DenseCounter acc(0, 2 * s.aperture());
  for (Position a : p)
    for (Position b : p) acc.add(a + b);
  return LagMultiset(CoarrayKind::Sca, acc.to_map());
}

inline LagMultiset diff_coarray(const SensorArray& s) {
  const auto p = s.positions();
  detail::DenseCounter acc(-s.aperture(), s.aperture());
  for (Position a : p)
    for (Position b : p) acc.add(a - b);
  return LagMultiset(CoarrayKind::Dca, acc.to_map());
}

inline CoarrayKind kind_of(FocCase c) {
  switch (c) {
    case FocCase::One: return CoarrayKind::Foca1;
    case FocCase::Two: return CoarrayKind::Foca2;
    case FocCase::Three: return CoarrayKind::Foca3;
  }
  return CoarrayKind::Foca1;
}

/// Virtual position of an ordered quadruple under a given case.
inline Lag virtual_position(const SensorArray& s, FocCase c, const std::array<std::uint16_t, 4>& idx) {
  const auto sg = sign_pattern(c);
  Lag v = 0;
  for (int k = 0; k < 4; ++k) v += sg[static_cast<std::size_t>(k)] * s[idx[static_cast<std::size_t>(k)]];
  return v;
}

/// Fourth-order co-array of one case over all N^4 ordered quadruples.
inline LagMultiset foca(const SensorArray& s, FocCase c, bool with_generators = false) {
  const std::size_t n = s.size();
  if (n > 65535) throw ParameterError("array too large for quadruple enumeration");
  const auto p = s.positions();
  const auto sg = sign_pattern(c);
  const Lag ap = s.aperture();
  detail::DenseCounter acc(-3 * ap, 3 * ap);
  LagMultiset::GeneratorMap gens;
  for (std::size_t a = 0; a < n; ++a) {
    const Lag va = sg[0] * p[a];
    for (std::size_t b = 0; b < n; ++b) {
      const Lag vb = va + sg[1] * p[b];
      for (std::size_t d3 = 0; d3 < n; ++d3) {
        const Lag vc = vb + sg[2] * p[d3];
        for (std::size_t d4 = 0; d4 < n; ++d4) {
          const Lag lag = vc + sg[3] * p[d4];
          acc.add(lag);
          if (with_generators)
            gens[lag].push_back(Generator{c, {static_cast<std::uint16_t>(a), static_cast<std::uint16_t>(b),
                                              static_cast<std::uint16_t>(d3), static_cast<std::uint16_t>(d4)}});
        }
      }
    }
  }
  LagMultiset out(kind_of(c), acc.to_map());
  if (with_generators) out.set_generators(std::move(gens));
  return out;
}

/// Bag sum of the three fourth-order co-arrays (3 N^4 entries in total).
inline LagMultiset foeca(const SensorArray& s, bool with_generators = false) {
  auto acc = bag_sum(foca(s, FocCase::One, with_generators), foca(s, FocCase::Two, with_generators),
                     CoarrayKind::Foeca);
  return bag_sum(acc, foca(s, FocCase::Three, with_generators), CoarrayKind::Foeca);
}

inline LagMultiset build_coarray(const SensorArray& s, CoarrayKind k, bool with_generators = false) {
  switch (k) {
    case CoarrayKind::Sca: return sum_coarray(s);
    case CoarrayKind::Dca: return diff_coarray(s);
    case CoarrayKind::Foca1: return foca(s, FocCase::One, with_generators);
    case CoarrayKind::Foca2: return foca(s, FocCase::Two, with_generators);
    case CoarrayKind::Foca3: return foca(s, FocCase::Three, with_generators);
    case CoarrayKind::Foeca: return foeca(s, with_generators);
  }
  throw ParameterError("unknown co-array kind");
}

// ---------------------------------------------------------------------------
// Segment analysis

struct SegmentReport {
  Lag full_min = 0;
  Lag full_max = 0;
  Lag half_span = 0;  // central consecutive range is [-half_span, +half_span]
  LagSet holes;       // missing lags inside [full_min, full_max]
  std::int64_t dof = 1;

  Lag central_lo() const { return -half_span; }
  Lag central_hi() const { return half_span; }
};

/// Maximal zero-centred hole-free run plus every hole of the full span.
inline SegmentReport analyze_segment(const LagMultiset& l) {
  if (!l.contains(0)) throw PreconditionError("lag 0 is not in the multiset");
  SegmentReport r;
  r.full_min = l.min_lag();
  r.full_max = l.max_lag();
  while (l.contains(r.half_span + 1) && l.contains(-(r.half_span + 1))) ++r.half_span;
  Lag expect = r.full_min;
  for (const auto& [lag, m] : l.entries()) {
    for (; expect < lag; ++expect) r.holes.push_back(expect);
    expect = lag + 1;
  }
  r.dof = 2 * r.half_span + 1;
  return r;
}

/// Hole-free range guaranteed by the three-step FOGNA construction:
/// [-(2N3+1)E2, (2N3+1)E2] with E2 = 2E1 + N2(2E1+1).
inline Lag guaranteed_half_span(const FognaParams& p) { return (2 * Lag{p.n3} + 1) * p.e2; }

/// Second construction step: C(V1,-S2) u C(V1,-V1) u C(-V1,S2), V1 = {0..2E1}.
inline LagSet construction_step2(const FognaParams& p) {
  const LagSet v1 = range_set(0, 2 * p.e1);
  LagSet s2;
  for (Lag x = 4 * p.e1 + 1; x <= p.e2; x += 2 * p.e1 + 1) s2.push_back(x);
  return set_union(set_union(cross_sum(v1, negate(s2)), cross_sum(v1, negate(v1))), cross_sum(negate(v1), s2));
}

/// Third construction step: C(W,-S3) u W u C(-W,S3) with W the step-2 set.
inline LagSet construction_step3(const FognaParams& p) {
  const LagSet w = construction_step2(p);
  LagSet s3;
  for (Lag x = 2 * p.e2; x <= 2 * Lag{p.n3} * p.e2; x += 2 * p.e2) s3.push_back(x);
  return set_union(set_union(cross_sum(w, negate(s3)), w), cross_sum(negate(w), s3));
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const SegmentReport& r) {
  return nlohmann::json{{"full_min", r.full_min},
                        {"full_max", r.full_max},
                        {"central_consecutive", {-r.half_span, r.half_span}},
                        {"holes", r.holes},
                        {"dof", r.dof}};
}

/// {"kind": ..., "total": ..., "entries": [[lag, multiplicity], ...]}
inline nlohmann::json to_json(const LagMultiset& l, bool include_entries = true) {
  nlohmann::json j{{"kind", to_string(l.kind())}, {"total", l.total()}, {"distinct", l.entries().size()}};
  if (include_entries) {
    auto arr = nlohmann::json::array();
    for (const auto& [lag, m] : l.entries()) arr.push_back({lag, m});
    j["entries"] = std::move(arr);
  }
  return j;
}

}  // namespace fogna
