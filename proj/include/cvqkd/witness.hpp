#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/estimation.hpp"
#include "cvqkd/evm.hpp"
#include "cvqkd/moments.hpp"
#include "cvqkd/sdp.hpp"
#include "cvqkd/units.hpp"

namespace cvqkd {

// Where the fixed coherence scalar c comes from.
//   Source:  c = exp(-2 alpha^2)/2 — trusts only the preparation; any loss is
//            treated adversarially. The conservative default; the bound
//            curves are generated in this mode.
//   Channel: c = exp(-2 T alpha^2)/2 — overlap of the nominally received
//            conditional states after a beam-splitter loss channel (which
//            keeps them pure). Used when analyzing measured batches against
//            a characterized transmission.
enum class CoherenceMode { Source, Channel };

enum class SdpBackend { InteriorPoint, Bisection };

struct WitnessVerdict {
  double t_star = 0.0;
  bool entangled = false;
  Mat3c completion = Mat3c::Zero();  // optimizing off-diagonal block (diagnostic)
  int solver_iterations = 0;
  SolverStatus status = SolverStatus::NumericalFailure;
  double certified_gap = 0.0;
  double projection_distance = 0.0;  // PSD repair applied to inputs, 0 for analytic moments
};

struct WitnessOptions {
  CoherenceMode mode = CoherenceMode::Source;
  SdpBackend backend = SdpBackend::InteriorPoint;
  double tolerance = 1e-7;
};

namespace detail {

// Free directions of the completion search: every entry of the off-diagonal
// block except the fixed (0,0) coherence, split into real and imaginary
// Hermitian generators. Order matters — completion_from_coefficients must
// enumerate identically.
inline std::vector<Mat6c> completion_directions() {
  std::vector<Mat6c> dirs;
  dirs.reserve(16);
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      if (k == 0 && l == 0) continue;
      Mat6c re = Mat6c::Zero();
      re(k, 3 + l) = std::complex<double>(1.0, 0.0);
      re(3 + l, k) = std::complex<double>(1.0, 0.0);
      dirs.push_back(re);
      Mat6c im = Mat6c::Zero();
      im(k, 3 + l) = std::complex<double>(0.0, 1.0);
      im(3 + l, k) = std::complex<double>(0.0, -1.0);
      dirs.push_back(im);
    }
  }
  return dirs;
}

inline Mat3c completion_from_coefficients(std::complex<double> c, const Eigen::VectorXd& v) {
  Mat3c d = Mat3c::Zero();
  d(0, 0) = c;
  int j = 0;
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      if (k == 0 && l == 0) continue;
      d(k, l) = std::complex<double>(v[2 * j], v[2 * j + 1]);
      ++j;
    }
  }
  return d;
}

// Two PSD blocks per margin problem: the real embedding of chi(D) and of its
// Alice partial transpose. Both must stay above t*I simultaneously.
inline LmiMarginProblem build_margin_problem(const EvmProblem& p) {
  Mat3c d_fixed = Mat3c::Zero();
  d_fixed(0, 0) = p.c;
  const Mat6c chi0 = assemble_evm(p, d_fixed);

  LmiMarginProblem prob;
  prob.f0 = {real_embedding(chi0), real_embedding(partial_transpose_alice(chi0))};
  for (const Mat6c& g : completion_directions()) {
    prob.fi.push_back({real_embedding(g), real_embedding(partial_transpose_alice(g))});
  }
  return prob;
}

}  // namespace detail

// Decide separability-compatibility of the partially known expectation-value
// matrix: maximize the worst-case margin t over the unobserved completion.
// t* < -tolerance means no completion keeps both chi and its partial
// transpose positive — only an entangled effective state reproduces the
// observed blocks. A solver failure is reported through `status`, never
// turned into a verdict.
inline WitnessVerdict sdp_feasibility_margin(const EvmProblem& p,
                                             SdpBackend backend = SdpBackend::InteriorPoint) {
  validate_evm_problem(p);
  const LmiMarginProblem prob = detail::build_margin_problem(p);

  LmiMarginResult res;
  if (backend == SdpBackend::InteriorPoint) {
    res = solve_lmi_margin_ipm(prob);
    if (res.status != SolverStatus::Converged && res.gap >= p.tolerance / 10.0) {
      const LmiMarginResult alt = solve_lmi_margin_bisection(prob, p.tolerance);
      if (alt.status == SolverStatus::Converged) res = alt;
    }
  } else {
    res = solve_lmi_margin_bisection(prob, p.tolerance);
  }

  WitnessVerdict v;
  v.t_star = res.t_star;
  v.solver_iterations = res.iterations;
  v.status = res.status;
  v.certified_gap = res.gap;
  // t_star is a certificate-backed lower bound; t_star + gap bounds the
  // optimum from above. Certify entanglement only when even the upper bound
  // clears the threshold.
  const bool certified = res.status == SolverStatus::Converged || res.gap < p.tolerance / 10.0;
  v.entangled = certified && res.t_star + res.gap < -p.tolerance;
  v.completion = detail::completion_from_coefficients(p.c, res.v);
  return v;
}

// Witness from two conditional moment sets plus the source amplitude. The
// moment matrices are repaired onto the PSD cone only within the statistical
// window of their sample counts; analytic injections pass through untouched.
inline WitnessVerdict witness_from_moments(const MomentSet& m0, const MomentSet& m1, double alpha,
                                           double transmission, const WitnessOptions& opts = {}) {
  if (!(alpha > 0.0)) throw std::invalid_argument("witness_from_moments: alpha must be > 0");
  if (!(transmission > 0.0 && transmission <= 1.0))
    throw std::invalid_argument("witness_from_moments: transmission must lie in (0,1]");

  Mat3c big0 = conditional_moment_matrix(m0);
  Mat3c big1 = conditional_moment_matrix(m1);
  double dist = 0.0;
  dist += project_psd_within_noise(big0, variance_rel_stat_error(m0.n_samples));
  dist += project_psd_within_noise(big1, variance_rel_stat_error(m1.n_samples));

  EvmProblem p;
  p.B0 = 0.5 * big0;
  p.B1 = 0.5 * big1;
  const double a2 = alpha * alpha;
  const double overlap =
      opts.mode == CoherenceMode::Channel ? std::exp(-2.0 * transmission * a2) : std::exp(-2.0 * a2);
  p.c = std::complex<double>(0.5 * overlap, 0.0);
  p.tolerance = opts.tolerance;

  WitnessVerdict v = sdp_feasibility_margin(p, opts.backend);
  v.projection_distance = dist;
  return v;
}

// Full data pipeline: per-axis calibration of the shot-noise reference (so
// the interleaved vacuum slots define 1 SNU exactly), conditional moments per
// bit, then the completion search with the channel-mode coherence for the
// characterized transmission.
inline WitnessVerdict witness_from_data(const std::vector<TrialRecord>& records, const SourceConfig& src,
                                        double channel_transmission, double tolerance = 1e-7,
                                        SdpBackend backend = SdpBackend::InteriorPoint) {
  const MomentSet vac = estimate_vacuum_moments(records);
  if (!(vac.var_x > 0.0 && vac.var_y > 0.0))
    throw std::invalid_argument("witness_from_data: degenerate vacuum calibration");
  const double sx = std::sqrt(vac.var_x);
  const double sy = std::sqrt(vac.var_y);

  MomentSet m0 = estimate_conditional_moments(records, 0);
  MomentSet m1 = estimate_conditional_moments(records, 1);
  for (MomentSet* m : {&m0, &m1}) {
    m->mean_x /= sx;
    m->mean_y /= sy;
    m->var_x /= vac.var_x;
    m->var_y /= vac.var_y;
    m->cov_xy /= sx * sy;
  }

  WitnessOptions opts;
  opts.mode = CoherenceMode::Channel;
  opts.backend = backend;
  opts.tolerance = tolerance;
  return witness_from_moments(m0, m1, resolved_alpha(src), channel_transmission, opts);
}

struct BoundPoint {
  double excess = 0.0;
  bool entangled = false;
};

struct BoundCurve {
  double transmission = 1.0;
  double overlap = 0.0;
  std::vector<BoundPoint> points;
  double e_max = 0.0;  // SNU
};

// Analytic witness evaluation at a symmetric excess variance E: conditional
// means ±sqrt(T)·alpha, per-axis operator variance (1+E)/4 — E referenced to
// the vacuum quadrature variance, which is how the bound curves are drawn.
inline WitnessVerdict witness_at_excess(double transmission, double overlap, double excess,
                                        const WitnessOptions& opts = {}) {
  const double alpha = amplitude_for_overlap(overlap);
  MomentSet m1;
  m1.convention = UnitConvention::Natural;
  m1.n_samples = 0;
  m1.mean_x = std::sqrt(transmission) * alpha;
  m1.mean_y = 0.0;
  m1.var_x = (2.0 + excess) / 4.0;  // heterodyne outcome variance: (1+E)/4 + 1/4
  m1.var_y = (2.0 + excess) / 4.0;
  m1.cov_xy = 0.0;
  MomentSet m0 = m1;
  m0.mean_x = -m1.mean_x;
  return witness_from_moments(m0, m1, alpha, transmission, opts);
}

// Tolerable-excess-variance limit at (T, o): bisect the symmetric E between
// the entangled and inconclusive regimes. The verdict is monotone in E, which
// the regression suite checks on a grid.
inline BoundCurve entanglement_bound(double transmission, double overlap, double resolution = 1e-3,
                                     CoherenceMode mode = CoherenceMode::Source,
                                     SdpBackend backend = SdpBackend::InteriorPoint) {
  if (!(transmission > 0.0 && transmission <= 1.0))
    throw std::invalid_argument("entanglement_bound: transmission must lie in (0,1]");
  if (!(overlap > 0.0 && overlap < 1.0))
    throw std::invalid_argument("entanglement_bound: overlap must lie in (0,1)");
  if (!(resolution > 0.0)) throw std::invalid_argument("entanglement_bound: resolution must be > 0");

  WitnessOptions opts;
  opts.mode = mode;
  opts.backend = backend;

  BoundCurve curve;
  curve.transmission = transmission;
  curve.overlap = overlap;

  const bool at_zero = witness_at_excess(transmission, overlap, 0.0, opts).entangled;
  curve.points.push_back({0.0, at_zero});
  if (!at_zero) {
    curve.e_max = 0.0;
    return curve;
  }

  double lo = 0.0;
  double hi = 1.0;
  while (witness_at_excess(transmission, overlap, hi, opts).entangled) {
    curve.points.push_back({hi, true});
    lo = hi;
    hi *= 2.0;
    if (hi > 64.0) {  // unreachable for physical parameters; refuse to loop forever
      curve.e_max = lo;
      return curve;
    }
  }
  curve.points.push_back({hi, false});

  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    const bool ent = witness_at_excess(transmission, overlap, mid, opts).entangled;
    curve.points.push_back({mid, ent});
    (ent ? lo : hi) = mid;
  }
  curve.e_max = 0.5 * (lo + hi);

  std::sort(curve.points.begin(), curve.points.end(),
            [](const BoundPoint& a, const BoundPoint& b) { return a.excess < b.excess; });
  return curve;
}

}
