#pragma once

#include <array>

// Bundled reference dataset: measured operating points of a binary
// coherent-state heterodyne link, used by the reproduction harness and the
// regression suite. Excess variances are quoted as fractions of the vacuum
// variance (an entry of 0.008 means the conditional variance was 0.8% above
// vacuum). Key rates are secret bits per accepted signal pulse.
namespace cvqkd::reference {

// One measured operating point: source overlap, channel transmission and the
// excess variance seen on each heterodyne axis. e_x_corrected is the x-axis
// value after subtracting the independently calibrated electronic noise from
// the vacuum reference, which raises the excess attributed to the channel.
struct VarianceRow {
  double overlap;
  double transmission;
  double e_x;
  double e_y;
  double e_x_corrected;
};

inline constexpr std::array<VarianceRow, 9> kVarianceTable = {{
    {0.51, 1.000, 0.008, 0.001, 0.045},
    {0.50, 0.457, 0.002, -0.003, 0.083},
    {0.78, 1.000, -0.002, -0.002, 0.035},
    {0.77, 0.457, 0.003, 0.001, 0.083},
    {0.52, 1.000, 0.016, 0.001, 0.053},
    {0.52, 0.483, 0.002, 0.003, 0.077},
    {0.51, 0.650, 0.002, 0.000, 0.058},
    {0.65, 1.000, 0.006, -0.005, 0.042},
    {0.65, 0.483, 0.001, 0.000, 0.075},
}};

// Quoted one-digit reporting error of the table entries, same fractional
// units (the x column is good to +-0.005, the y column to +-0.003).
inline constexpr double kVarianceTableErrX = 0.005;
inline constexpr double kVarianceTableErrY = 0.003;

// Reference postselection key rates for five of the operating points above,
// direct and reverse reconciliation, per signal pulse.
struct KeyRateRow {
  double overlap;
  double transmission;
  double g_dr;
  double g_rr;
};

inline constexpr std::array<KeyRateRow, 5> kKeyRateTable = {{
    {0.50, 0.457, 0.0027, 0.0168},
    {0.77, 0.457, 0.0004, 0.0025},
    {0.52, 0.483, 0.0038, 0.0194},
    {0.65, 0.483, 0.0021, 0.0106},
    {0.51, 0.650, 0.0244, 0.0562},
}};

// Postselection acceptance fraction and average error rate versus threshold
// for the overlap-0.65 source through the T = 0.483 channel.
struct AcceptanceRow {
  double tau;
  double acceptance;
  double avg_error;
};

inline constexpr std::array<AcceptanceRow, 5> kAcceptanceCurve = {{
    {0.0, 1.0000, 0.3241},
    {0.5, 0.6520, 0.2600},
    {1.0, 0.3659, 0.1986},
    {1.5, 0.1735, 0.1454},
    {2.0, 0.0683, 0.1028},
}};

// Channel transmissions the tolerable-excess-noise curves are tabulated at.
inline constexpr std::array<double, 4> kBoundCurveTransmissions = {1.0, 0.65,
                                                                   0.483,
                                                                   0.457};

// Clock context for converting per-pulse rates to bits per second: raw
// modulation rate and the effective signal rate once calibration slots are
// interleaved.
inline constexpr double kRawPulseRateHz = 100e3;
inline constexpr double kEffectiveSignalRateHz = 16.7e3;

}  // namespace cvqkd::reference
