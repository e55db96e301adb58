#pragma once

#include <array>

namespace tbcv::cli {

/// Published optimum of the ideal i-photon protocol.
struct ReferenceOptimum {
  double distance_km;
  int photons;
  double mu;
  double tau;
  double e_z_percent;
};

inline constexpr std::array<ReferenceOptimum, 14> kReferenceOptima = {{
    {0, 1, 0.356, 1.437, 30.95},  {0, 2, 1.487, 1.641, 10.52},  {0, 3, 2.395, 1.845, 5.31},
    {0, 4, 2.395, 1.845, 5.31},   {10, 1, 0.137, 3.476, 29.80}, {10, 2, 0.924, 2.253, 14.84},
    {10, 3, 1.887, 2.457, 5.66},  {10, 4, 2.395, 2.457, 4.17},  {20, 2, 0.728, 3.068, 15.48},
    {20, 3, 1.487, 3.068, 6.91},  {20, 4, 1.887, 3.272, 3.85},  {40, 2, 0.356, 4.495, 28.52},
    {40, 3, 0.728, 4.495, 17.07}, {40, 4, 1.172, 4.699, 8.81},
}};

/// Published decoy-protocol parameters of the practical setup.
struct ReferenceDecoyRow {
  double distance_km;
  double mu;
  double tau;
  double nu1;
  double nu2;
};

inline constexpr std::array<ReferenceDecoyRow, 6> kReferenceDecoyRows = {{
    {0, 1.487, 1.641, 1.737e-1, 1e-4},
    {5, 1.172, 2.049, 3.406e-3, 2.740e-4},
    {10, 0.924, 2.457, 2.993e-2, 1e-4},
    {15, 0.924, 3.068, 1.861e-2, 1e-4},
    {20, 0.728, 3.476, 1.355e-2, 2.441e-4},
    {25, 0.728, 4.291, 1.355e-2, 1.562e-4},
}};

/// Practical setup: excess noise and misalignment of the decoy comparison.
inline constexpr double kPracticalExcessNoise = 1e-3;
inline constexpr double kPracticalMisalignmentDeg = 5.0;
/// Noiseless setup: fixed decoy intensities (vacuum is the fourth level).
inline constexpr double kNoiselessDecoy1 = 1.2e-4;
inline constexpr double kNoiselessDecoy2 = 1e-4;
/// A thermal-loss channel needs eta < 1 when xi > 0; "0 km" with excess noise is evaluated here.
inline constexpr double kNoisyZeroDistanceKm = 1e-6;

}  // namespace tbcv::cli
