#pragma once

// 128-bit structural fingerprints. Composite nodes mix the fingerprints of
// their parts through a SplitMix64-style finalizer; distribution nodes XOR
// their entry fingerprints together, so the fingerprint of a set does not
// depend on the order its entries were supplied in.

#include <cstdint>
#include <functional>

namespace slc {

struct Fingerprint {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend constexpr bool operator==(const Fingerprint&, const Fingerprint&) = default;

  constexpr Fingerprint& operator^=(const Fingerprint& other) {
    hi ^= other.hi;
    lo ^= other.lo;
    return *this;
  }
  friend constexpr Fingerprint operator^(Fingerprint a, const Fingerprint& b) {
    a ^= b;
    return a;
  }
};

namespace detail {

// SplitMix64 finalizer (Vigna). Good avalanche, cheap, and stateless.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Fold one 64-bit word into a running 128-bit state.
constexpr Fingerprint fp_absorb(Fingerprint st, std::uint64_t w) {
  st.lo = mix64(st.lo ^ w);
  st.hi = mix64(st.hi + st.lo + 0x2545F4914F6CDD1Dull);
  return st;
}

constexpr Fingerprint fp_seeded(std::uint64_t seed, std::uint64_t domain) {
  Fingerprint st{mix64(seed ^ domain), mix64(seed + domain)};
  return st;
}

}  // namespace detail

// Domain separators for the node shapes. Arbitrary odd constants.
inline constexpr std::uint64_t kFpVar = 0x56415231ull;
inline constexpr std::uint64_t kFpLam = 0x4C414D31ull;
inline constexpr std::uint64_t kFpApp = 0x41505031ull;
inline constexpr std::uint64_t kFpEntry = 0x454E5431ull;

inline constexpr std::uint64_t kDefaultFingerprintSeed = 0x736C632D666E6731ull;

inline constexpr Fingerprint fp_var(std::uint64_t seed, std::uint32_t index) {
  return detail::fp_absorb(detail::fp_seeded(seed, kFpVar), index);
}

inline constexpr Fingerprint fp_lam(std::uint64_t seed, const Fingerprint& body) {
  auto st = detail::fp_seeded(seed, kFpLam);
  st = detail::fp_absorb(st, body.hi);
  st = detail::fp_absorb(st, body.lo);
  return st;
}

inline constexpr Fingerprint fp_app(std::uint64_t seed, const Fingerprint& fn,
                                    const Fingerprint& arg) {
  auto st = detail::fp_seeded(seed, kFpApp);
  st = detail::fp_absorb(st, fn.hi);
  st = detail::fp_absorb(st, fn.lo);
  st = detail::fp_absorb(st, arg.hi);
  st = detail::fp_absorb(st, arg.lo);
  return st;
}

// One distribution entry: the member term together with the exact bit
// pattern of its probability. Entries of one distribution are combined by
// XOR, the classic multiset hash, so entry order cannot leak into the value.
inline Fingerprint fp_dist_entry(std::uint64_t seed, const Fingerprint& term,
                                 double probability) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(probability));
  __builtin_memcpy(&bits, &probability, sizeof(bits));
  auto st = detail::fp_seeded(seed, kFpEntry);
  st = detail::fp_absorb(st, term.hi);
  st = detail::fp_absorb(st, term.lo);
  st = detail::fp_absorb(st, bits);
  return st;
}

}  // namespace slc

template <>
struct std::hash<slc::Fingerprint> {
  std::size_t operator()(const slc::Fingerprint& fp) const noexcept {
    return static_cast<std::size_t>(fp.lo ^ (fp.hi * 0x9E3779B97F4A7C15ull));
  }
};
