#pragma once

// Pinned tolerances of the acceptance criteria. Shared by the CLI checks and
// the acceptance binary so the two can never disagree.
namespace carleman_lab::acceptance {

// c01 identity refinement
inline constexpr double kIdentityRatioLo = 3.0;
inline constexpr double kIdentityRatioHi = 5.0;
inline constexpr double kIdentityRelResidual = 1e-2;

// c02 exact algebra
inline constexpr double kAlgebraRel = 1e-12;

// c03 / c03b Q₊ positivity
inline constexpr double kQPlusConstant = 7.0 / 26.0;
inline constexpr double kQPlusSlack = 0.01;

// c04 subelliptic drift
inline constexpr double kSubellipticDrift = 0.20;

// c05 multipliers
inline constexpr double kToneError = 1e-10;
inline constexpr double kConjugationRatio = 3.0;
inline constexpr double kAlmostLocalityRel = 0.15;

// c06 wave solver
inline constexpr double kTravelingWaveError = 5e-3;
inline constexpr double kLeakage = 1e-6;
inline constexpr double kEnergyDrift = 1e-3;

// c07 ledger
inline constexpr double kLedgerRel = 1e-12;
inline constexpr int kLedgerMaxK = 10;

// c08 optimization lemma
inline constexpr double kOptimizeSlopeRel = 0.10;

// c09 stability suite
inline constexpr double kQualitativeProbe = 1e-6;

// c10 strip measure
inline constexpr double kStripExponent = 2.0;
inline constexpr double kStripExponentRel = 0.10;

// local-quant probe refinement drift
inline constexpr double kLocalQuantDrift = 0.30;
// carleman estimate 𝔞̂ refinement drift
inline constexpr double kAhatDrift = 0.30;

} // namespace carleman_lab::acceptance
