#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slicefed {

inline constexpr const char* kVersion = "1.0.0";

inline constexpr std::size_t kNumSlices = 3;
inline constexpr std::size_t kNumConstraints = 3;

/// Service slices in their fixed spectral order: eMBB | URLLC | mMTC.
enum class Slice : std::size_t { EMBB = 0, URLLC = 1, MMTC = 2 };

template <class T>
using PerSlice = std::array<T, kNumSlices>;

inline constexpr std::size_t index(Slice s) { return static_cast<std::size_t>(s); }

std::string_view slice_name(Slice s);

/// UEs within a cell are assigned to slices round-robin by local index.
inline constexpr Slice slice_of_local_ue(std::size_t local_index) {
  return static_cast<Slice>(local_index % kNumSlices);
}

// Error hierarchy. The C API maps each leaf to a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class ContractViolation : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class NumericalFailure : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};

using Rng = std::mt19937_64;

/// Independent, reproducible stream for a (seed, purpose, entity) triple.
Rng make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t entity = 0);

/// Stream purposes.
namespace stream {
inline constexpr std::uint64_t kTopology = 1;
inline constexpr std::uint64_t kFading = 2;
inline constexpr std::uint64_t kTraffic = 3;
inline constexpr std::uint64_t kAgent = 4;
inline constexpr std::uint64_t kInit = 5;
inline constexpr std::uint64_t kBaseline = 6;
inline constexpr std::uint64_t kEvaluation = 7;
inline constexpr std::uint64_t kFederation = 8;
}  // namespace stream

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Sums within this of 1 are simplex points up to rounding.
inline constexpr double kSimplexTolerance = 1e-12;

/// Bandwidth fractions a_n^s per slice.
struct Action {
  PerSlice<double> fractions{};

  double sum() const { return fractions[0] + fractions[1] + fractions[2]; }
  double operator[](Slice s) const { return fractions[index(s)]; }
  bool valid() const;  // each in [0,1], finite; sum may exceed 1 (g3 reports it)
  static Action equal_split();
};

}  // namespace slicefed
