#pragma once

#include <array>

namespace forestinv::evaluate {

// Published observed (field) and predicted plot totals for eleven 15 m plots.
inline constexpr std::array<double, 11> kReferenceVolumeObserved{3.00,  3.33,  57.87, 21.32, 15.41, 12.22,
                                                                  14.53, 25.09, 18.42, 6.74,  20.51};
inline constexpr std::array<double, 11> kReferenceVolumePredicted{1.02, 1.32,  63.92, 13.14, 12.22, 3.19,
                                                                   5.67, 12.40, 11.57, 0.34,  0.23};
inline constexpr std::array<double, 11> kReferenceAgbObserved{1.84, 1.99,  26.95, 11.82, 7.49, 6.10,
                                                               7.24, 12.76, 9.21,  4.04,  12.25};
inline constexpr std::array<double, 11> kReferenceAgbPredicted{1.07, 1.45, 37.01, 8.99, 9.19, 2.68,
                                                                5.39, 9.53, 7.43,  5.48, 3.68};

} // namespace forestinv::evaluate
