#pragma once

#include <cstdint>

namespace stoplab {

using NodeId = std::int64_t;

// Default comparison tolerances. Operations whose contract depends on a
// tolerance take it as a parameter; these are the library-wide defaults.
inline constexpr double kProbSumTol = 1e-12;
inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kGapTol = 1e-8;

// Sentinel on the pre track meaning "no predictable stop is ever attractive".
inline constexpr double kNoPredictableStop = -1e18;

inline constexpr std::uint64_t kDefaultEnumerationCap = 100000;

}  // namespace stoplab
