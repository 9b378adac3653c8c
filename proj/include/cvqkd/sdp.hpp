#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cvqkd {

enum class SolverStatus { Converged, MaxIterations, Stalled, NumericalFailure };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max-iterations";
    case SolverStatus::Stalled: return "stalled";
    case SolverStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

// Linear-matrix-inequality margin problem over one or more symmetric blocks:
//
//   maximize  t   subject to   F0[b] + sum_i v_i * Fi[i][b]  >=  t*I   for all b.
//
// The optimum t* is the best worst-case smallest eigenvalue reachable by the
// free directions. With no free directions t* is exactly
// min_b lambda_min(F0[b]), which the regression tests exploit.
struct LmiMarginProblem {
  std::vector<Eigen::MatrixXd> f0;               // one symmetric matrix per block
  std::vector<std::vector<Eigen::MatrixXd>> fi;  // fi[i][b], symmetric, same shapes as f0
};

struct LmiMarginResult {
  double t_star = 0.0;
  Eigen::VectorXd v;        // optimizing free coefficients
  double gap = 0.0;         // certified duality gap at exit
  int iterations = 0;
  SolverStatus status = SolverStatus::NumericalFailure;
};

namespace detail {

inline double block_inner(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

inline double min_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

// Largest step alpha keeping M + alpha*D positive semidefinite, computed
// through the Cholesky factor of M: alpha = -1/lambda_min(L^-1 D L^-T) when
// that eigenvalue is negative, effectively unbounded otherwise.
inline double max_psd_step(const Eigen::MatrixXd& m, const Eigen::MatrixXd& d) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Eigen::MatrixXd l_inv_d = llt.matrixL().solve(d);
  Eigen::MatrixXd s = llt.matrixL().solve(l_inv_d.transpose()).transpose();
  s = 0.5 * (s + s.transpose()).eval();
  const double lam = min_eig_sym(s);
  if (lam >= -1e-14) return 1e30;
  return -1.0 / lam;
}

// A*(y) restricted to one block, for the implicit constraint operators
// A_i = -Fi (free directions) and A_p = I (margin variable):
//   A*(y) = -sum_i y_i Fi + y_p I.
// The dual slack is Z = F0 - A*(y) and a step dy changes it by -A*(dy).
inline Eigen::MatrixXd apply_astar_block(const LmiMarginProblem& prob, const Eigen::VectorXd& y, size_t b) {
  const int p = static_cast<int>(prob.fi.size());
  Eigen::MatrixXd out = y[p] * Eigen::MatrixXd::Identity(prob.f0[b].rows(), prob.f0[b].cols());
  for (int i = 0; i < p; ++i) out -= y[i] * prob.fi[static_cast<size_t>(i)][b];
  return out;
}

}  // namespace detail

// Primal-dual interior-point solver (HKM direction with Mehrotra
// predictor-corrector) for the margin problem above.
//
// The LMI is treated as the dual of the standard pair
//   min <F0, X>  s.t.  <Fi, X> = 0,  tr X = 1,  X >= 0 (block product cone),
// whose strictly feasible point X = I/N exists whenever every Fi is
// traceless (true for the completion directions used by the witness; a
// least-squares correction handles the general case). Dual feasibility
// Z = F0 + sum v Fi - t I is maintained exactly by construction, so the
// duality gap <X, Z> alone certifies optimality of the returned t*.
inline LmiMarginResult solve_lmi_margin_ipm(const LmiMarginProblem& prob, double eps_gap = 1e-10,
                                            int max_iter = 80) {
  const size_t nblocks = prob.f0.size();
  const int p = static_cast<int>(prob.fi.size());  // free directions
  const int ny = p + 1;                            // plus the margin variable t
  if (nblocks == 0) throw std::invalid_argument("solve_lmi_margin_ipm: no blocks");
  for (const auto& dirs : prob.fi) {
    if (dirs.size() != nblocks) throw std::invalid_argument("solve_lmi_margin_ipm: direction/block shape mismatch");
  }

  double ntot = 0.0;
  for (const auto& f : prob.f0) ntot += static_cast<double>(f.rows());

  auto dual_slack = [&](const Eigen::VectorXd& yv, std::vector<Eigen::MatrixXd>& z) {
    for (size_t b = 0; b < nblocks; ++b) {
      z[b] = prob.f0[b] - detail::apply_astar_block(prob, yv, b);
    }
  };

  auto inner_a = [&](int i, const std::vector<Eigen::MatrixXd>& w) {
    // A_i . W
    if (i < p) {
      double s = 0.0;
      for (size_t b = 0; b < nblocks; ++b) s -= prob.fi[static_cast<size_t>(i)][b].cwiseProduct(w[b]).sum();
      return s;
    }
    double s = 0.0;
    for (size_t b = 0; b < nblocks; ++b) s += w[b].trace();
    return s;
  };

  LmiMarginResult res;
  res.v = Eigen::VectorXd::Zero(std::max(p, 1));

  // Strictly feasible starting points.
  std::vector<Eigen::MatrixXd> x(nblocks), z(nblocks);
  for (size_t b = 0; b < nblocks; ++b) {
    x[b] = Eigen::MatrixXd::Identity(prob.f0[b].rows(), prob.f0[b].cols()) / ntot;
  }
  // General Fi may have nonzero trace; correct X onto the affine constraints.
  {
    Eigen::VectorXd rp(ny);
    for (int i = 0; i < ny; ++i) rp[i] = (i == p ? 1.0 : 0.0) - inner_a(i, x);
    if (rp.norm() > 1e-13) {
      std::vector<std::vector<Eigen::MatrixXd>> amats(static_cast<size_t>(ny));
      for (int i = 0; i < ny; ++i) {
        amats[static_cast<size_t>(i)].resize(nblocks);
        for (size_t b = 0; b < nblocks; ++b) {
          amats[static_cast<size_t>(i)][b] =
              (i < p) ? Eigen::MatrixXd(-prob.fi[static_cast<size_t>(i)][b])
                      : Eigen::MatrixXd(Eigen::MatrixXd::Identity(prob.f0[b].rows(), prob.f0[b].cols()));
        }
      }
      Eigen::MatrixXd gram(ny, ny);
      for (int i = 0; i < ny; ++i)
        for (int j = 0; j < ny; ++j)
          gram(i, j) = detail::block_inner(amats[static_cast<size_t>(i)], amats[static_cast<size_t>(j)]);
      Eigen::VectorXd mu_fix = gram.ldlt().solve(rp);
      for (size_t b = 0; b < nblocks; ++b)
        for (int i = 0; i < ny; ++i) x[b] += mu_fix[i] * amats[static_cast<size_t>(i)][b];
      for (const auto& xb : x) {
        if (Eigen::LLT<Eigen::MatrixXd>(xb).info() != Eigen::Success) {
          res.status = SolverStatus::NumericalFailure;
          return res;
        }
      }
    }
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(ny);
  {
    double lmin = 1e300;
    for (const auto& f : prob.f0) lmin = std::min(lmin, detail::min_eig_sym(f));
    y[p] = lmin - 1.0;
  }
  dual_slack(y, z);

  double best_gap = 1e300;
  int stall_count = 0;

  std::vector<Eigen::MatrixXd> zinv(nblocks), dx_aff(nblocks), dz_aff(nblocks), dx(nblocks), dz(nblocks),
      rc(nblocks);

  for (int iter = 1; iter <= max_iter; ++iter) {
    double gap = 0.0;
    for (size_t b = 0; b < nblocks; ++b) gap += x[b].cwiseProduct(z[b]).sum();
    const double mu = gap / ntot;

    res.t_star = y[p];
    for (int i = 0; i < p; ++i) res.v[i] = y[i];
    res.gap = gap;
    res.iterations = iter - 1;

    if (gap < eps_gap) {
      res.status = SolverStatus::Converged;
      return res;
    }
    if (gap > best_gap * 0.999) {
      if (++stall_count >= 12) {
        res.status = SolverStatus::Stalled;
        return res;
      }
    } else {
      stall_count = 0;
    }
    best_gap = std::min(best_gap, gap);

    bool ok = true;
    for (size_t b = 0; b < nblocks; ++b) {
      Eigen::LLT<Eigen::MatrixXd> llt(z[b]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv[b] = llt.solve(Eigen::MatrixXd::Identity(z[b].rows(), z[b].cols()));
    }
    if (!ok) {
      res.status = SolverStatus::NumericalFailure;
      return res;
    }

    // Schur complement M_ij = A_i . (X A_j Z^-1), symmetrized (HKM).
    std::vector<std::vector<Eigen::MatrixXd>> w(static_cast<size_t>(ny));
    for (int j = 0; j < ny; ++j) {
      w[static_cast<size_t>(j)].resize(nblocks);
      for (size_t b = 0; b < nblocks; ++b) {
        if (j < p) {
          w[static_cast<size_t>(j)][b] = -x[b] * prob.fi[static_cast<size_t>(j)][b] * zinv[b];
        } else {
          w[static_cast<size_t>(j)][b] = x[b] * zinv[b];
        }
      }
    }
    Eigen::MatrixXd schur(ny, ny);
    for (int i = 0; i < ny; ++i)
      for (int j = 0; j < ny; ++j) schur(i, j) = inner_a(i, w[static_cast<size_t>(j)]);
    schur = 0.5 * (schur + schur.transpose()).eval();

    Eigen::LDLT<Eigen::MatrixXd> mldlt(schur);
    if (mldlt.info() != Eigen::Success) {
      schur.diagonal().array() += 1e-13 * schur.diagonal().cwiseAbs().maxCoeff();
      mldlt.compute(schur);
      if (mldlt.info() != Eigen::Success) {
        res.status = SolverStatus::NumericalFailure;
        return res;
      }
    }

    Eigen::VectorXd bvec = Eigen::VectorXd::Zero(ny);
    bvec[p] = 1.0;

    // Predictor (affine-scaling direction). With primal feasibility held
    // exactly, the predictor right-hand side collapses to b.
    const Eigen::VectorXd dy_aff = mldlt.solve(bvec);
    for (size_t b = 0; b < nblocks; ++b) {
      dz_aff[b] = -detail::apply_astar_block(prob, dy_aff, b);
      Eigen::MatrixXd t = -x[b] - x[b] * dz_aff[b] * zinv[b];
      dx_aff[b] = 0.5 * (t + t.transpose()).eval();
    }

    double ap_aff = 1.0, ad_aff = 1.0;
    for (size_t b = 0; b < nblocks; ++b) {
      ap_aff = std::min(ap_aff, detail::max_psd_step(x[b], dx_aff[b]));
      ad_aff = std::min(ad_aff, detail::max_psd_step(z[b], dz_aff[b]));
    }
    double mu_aff = 0.0;
    for (size_t b = 0; b < nblocks; ++b) {
      mu_aff += (x[b] + ap_aff * dx_aff[b]).cwiseProduct(z[b] + ad_aff * dz_aff[b]).sum();
    }
    mu_aff = std::max(mu_aff / ntot, 0.0);
    double sigma = std::clamp(std::pow(mu_aff / mu, 3), 0.0, 1.0);

    // Corrector with the Mehrotra cross term; reuses the Schur factorization.
    Eigen::VectorXd qc(ny);
    for (size_t b = 0; b < nblocks; ++b) {
      rc[b] = sigma * mu * Eigen::MatrixXd::Identity(z[b].rows(), z[b].cols()) - dx_aff[b] * dz_aff[b];
    }
    {
      std::vector<Eigen::MatrixXd> tmp(nblocks);
      for (size_t b = 0; b < nblocks; ++b) tmp[b] = rc[b] * zinv[b];
      for (int i = 0; i < ny; ++i) qc[i] = inner_a(i, tmp);
    }
    const Eigen::VectorXd dy = mldlt.solve(bvec - qc);
    for (size_t b = 0; b < nblocks; ++b) {
      dz[b] = -detail::apply_astar_block(prob, dy, b);
      Eigen::MatrixXd t = rc[b] * zinv[b] - x[b] - x[b] * dz[b] * zinv[b];
      dx[b] = 0.5 * (t + t.transpose()).eval();
    }

    double ap = 1.0, ad = 1.0;
    for (size_t b = 0; b < nblocks; ++b) {
      ap = std::min(ap, 0.98 * detail::max_psd_step(x[b], dx[b]));
      ad = std::min(ad, 0.98 * detail::max_psd_step(z[b], dz[b]));
    }
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);

    for (size_t b = 0; b < nblocks; ++b) x[b] += ap * dx[b];
    y += ad * dy;
    dual_slack(y, z);

    // Guard against a roundoff-singular Z right at the cone boundary.
    for (int back = 0; back < 6; ++back) {
      bool pd = true;
      for (const auto& zb : z) {
        if (Eigen::LLT<Eigen::MatrixXd>(zb).info() != Eigen::Success) {
          pd = false;
          break;
        }
      }
      if (pd) break;
      ad *= 0.5;
      y -= ad * dy;  // net: y = y_prev + ad*dy with the halved ad
      dual_slack(y, z);
    }
  }

  // Report the final iterate, not the one from the last loop top.
  double gap = 0.0;
  for (size_t b = 0; b < nblocks; ++b) gap += x[b].cwiseProduct(z[b]).sum();
  res.t_star = y[p];
  for (int i = 0; i < p; ++i) res.v[i] = y[i];
  res.gap = gap;
  res.iterations = max_iter;
  res.status = gap < eps_gap ? SolverStatus::Converged : SolverStatus::MaxIterations;
  return res;
}

// ---------------------------------------------------------------------------
// Fallback route: bisection on t with alternating-projection feasibility.
//
// For a candidate margin t, feasibility of {v : F0 + sum v Fi >= t I} is
// decided by Dykstra-style alternating projections between the affine set
// parameterized by v and the PSD product cone. Deliberately independent of
// the interior-point code path — the two must agree on the regression suite,
// which is the cross-check that catches bugs in either.

namespace detail {

inline void project_psd_blocks(std::vector<Eigen::MatrixXd>& w) {
  for (auto& m : w) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()).eval());
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    m = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  }
}

}  // namespace detail

struct FeasibilityCheck {
  bool feasible = false;       // an iterate reached the cone: exact certificate
  double best_margin = -1e300; // best exact min lambda_min(F0 + sum v Fi) seen, any t
  Eigen::VectorXd v;           // coefficients achieving best_margin
};

// Alternating projections (Dykstra form: the correction is only needed on
// the cone, the affine set being a subspace translate) between the affine
// family {F0 - tI + sum v Fi} and the PSD product cone.
//
// Every affine iterate doubles as an unconditional certificate: its exact
// minimum eigenvalue gives a margin some completion provably attains, which
// the caller keeps across probes. Feasibility at t is declared only through
// such a certificate, never from the projection distance, so "feasible"
// answers are rigorous; "infeasible" means no certificate surfaced before
// the distance plateaued or the sweep budget ran out.
inline FeasibilityCheck lmi_feasible_at(const LmiMarginProblem& prob, double t, int max_sweeps = 20000) {
  const size_t nblocks = prob.f0.size();
  const int p = static_cast<int>(prob.fi.size());

  std::vector<Eigen::MatrixXd> base(nblocks);
  for (size_t b = 0; b < nblocks; ++b) {
    base[b] = prob.f0[b] - t * Eigen::MatrixXd::Identity(prob.f0[b].rows(), prob.f0[b].cols());
  }

  FeasibilityCheck out;
  out.v = Eigen::VectorXd::Zero(std::max(p, 1));

  if (p == 0) {
    double lmin = 1e300;
    for (const auto& m : base) lmin = std::min(lmin, detail::min_eig_sym(m));
    out.best_margin = lmin + t;
    out.feasible = lmin >= 0.0;
    return out;
  }

  Eigen::MatrixXd gram(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      gram(i, j) = detail::block_inner(prob.fi[static_cast<size_t>(i)], prob.fi[static_cast<size_t>(j)]);
  Eigen::LDLT<Eigen::MatrixXd> gram_ldlt(gram);

  auto project_affine = [&](const std::vector<Eigen::MatrixXd>& win, std::vector<Eigen::MatrixXd>& wout,
                            Eigen::VectorXd& v) {
    Eigen::VectorXd g(p);
    for (int i = 0; i < p; ++i) {
      double s = 0.0;
      for (size_t b = 0; b < nblocks; ++b)
        s += prob.fi[static_cast<size_t>(i)][b].cwiseProduct(win[b] - base[b]).sum();
      g[i] = s;
    }
    v = gram_ldlt.solve(g);
    for (size_t b = 0; b < nblocks; ++b) {
      wout[b] = base[b];
      for (int i = 0; i < p; ++i) wout[b] += v[i] * prob.fi[static_cast<size_t>(i)][b];
    }
  };

  std::vector<Eigen::MatrixXd> aff(nblocks), cone(nblocks), corr(nblocks);
  for (size_t b = 0; b < nblocks; ++b) {
    aff[b] = base[b];
    corr[b] = Eigen::MatrixXd::Zero(base[b].rows(), base[b].cols());
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);

  double window_dist = 1e300;  // distance at the start of the plateau window
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // exact margin of the current affine point, independent of t
    double lmin = 1e300;
    for (const auto& m : aff) lmin = std::min(lmin, detail::min_eig_sym(m));
    if (lmin + t > out.best_margin) {
      out.best_margin = lmin + t;
      out.v = v;
    }
    if (lmin >= 0.0) {
      out.feasible = true;
      return out;
    }

    for (size_t b = 0; b < nblocks; ++b) cone[b] = aff[b] + corr[b];
    std::vector<Eigen::MatrixXd> pre = cone;
    detail::project_psd_blocks(cone);
    for (size_t b = 0; b < nblocks; ++b) corr[b] = pre[b] - cone[b];

    project_affine(cone, aff, v);

    double dist = 0.0;
    for (size_t b = 0; b < nblocks; ++b) dist += (aff[b] - cone[b]).squaredNorm();
    dist = std::sqrt(dist);
    // A genuinely infeasible level leaves a positive gap between the sets:
    // stop once the distance has effectively stopped shrinking.
    if (sweep % 64 == 63) {
      if (dist > 1e-7 && dist > window_dist * (1.0 - 1e-4)) return out;
      window_dist = dist;
    }
  }
  return out;
}

namespace detail {

// Minimum-norm point of the convex hull of the columns of g, by Frank-Wolfe
// on the simplex weights. Used for the bundle ascent direction below.
inline Eigen::VectorXd min_norm_in_hull(const Eigen::MatrixXd& g) {
  const int m = static_cast<int>(g.cols());
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / m);
  Eigen::VectorXd z = g * w;
  for (int it = 0; it < 200; ++it) {
    int j = 0;
    double best = 1e300;
    for (int k = 0; k < m; ++k) {
      const double s = z.dot(g.col(k));
      if (s < best) {
        best = s;
        j = k;
      }
    }
    const Eigen::VectorXd dz = g.col(j) - z;
    const double dd = dz.squaredNorm();
    if (dd < 1e-24) break;
    const double gamma = std::clamp(-z.dot(dz) / dd, 0.0, 1.0);
    if (gamma <= 0.0) break;  // no descent toward any vertex: optimal
    w *= (1.0 - gamma);
    w[j] += gamma;
    z += gamma * dz;
  }
  return z;
}

// Bundle-style supergradient ascent on the concave function
//   f(v) = min_b lambda_min(F0[b] + sum v_i Fi[b]).
// Supergradients u' Fi u are collected from the whole bottom eigenvalue
// cluster of every near-active block (the minimum eigenvalue is degenerate
// at the optimum — at the very least doubled by the real embedding), and the
// step direction is the minimum-norm point of their hull. f is concave, so
// with an exact-eigenvalue line search this converges to the global optimum;
// every accepted value is itself a rigorous certificate. This removes the
// tangency stall of the alternating projections, whose iterates approach the
// boundary only polynomially.
inline double polish_certificate(const LmiMarginProblem& prob, Eigen::VectorXd& v, int max_steps = 1500) {
  const size_t nb = prob.f0.size();
  const int p = static_cast<int>(prob.fi.size());
  if (p == 0) {
    double m = 1e300;
    for (const auto& f : prob.f0) m = std::min(m, min_eig_sym(f));
    return m;
  }

  auto assemble = [&](const Eigen::VectorXd& vv, size_t b) {
    Eigen::MatrixXd w = prob.f0[b];
    for (int i = 0; i < p; ++i) w += vv[i] * prob.fi[static_cast<size_t>(i)][b];
    return w;
  };
  auto feval = [&](const Eigen::VectorXd& vv) {
    double m = 1e300;
    for (size_t b = 0; b < nb; ++b) m = std::min(m, min_eig_sym(assemble(vv, b)));
    return m;
  };

  double f = feval(v);
  double step = 1e-3;
  int restarts = 0;
  for (int it = 0; it < max_steps; ++it) {
    if (step < 1e-15) {
      if (++restarts > 3) break;  // converged (or as far as arithmetic goes)
      step = 1e-6;
    }

    std::vector<Eigen::VectorXd> grads;
    double fmin = 1e300;
    std::vector<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>> eigs;
    eigs.reserve(nb);
    for (size_t b = 0; b < nb; ++b) {
      eigs.emplace_back(assemble(v, b));
      fmin = std::min(fmin, eigs.back().eigenvalues()[0]);
    }
    const double activity = std::max(1e-9, 0.5 * step);
    for (size_t b = 0; b < nb; ++b) {
      const auto& es = eigs[b];
      if (es.eigenvalues()[0] >= fmin + activity) continue;
      const double cluster = es.eigenvalues()[0] + activity;
      for (int j = 0; j < es.eigenvalues().size() && es.eigenvalues()[j] <= cluster; ++j) {
        const Eigen::VectorXd u = es.eigenvectors().col(j);
        Eigen::VectorXd g(p);
        for (int i = 0; i < p; ++i) g[i] = u.dot(prob.fi[static_cast<size_t>(i)][b] * u);
        grads.push_back(std::move(g));
      }
    }

    Eigen::MatrixXd gmat(p, static_cast<int>(grads.size()));
    for (int k = 0; k < gmat.cols(); ++k) gmat.col(k) = grads[static_cast<size_t>(k)];
    Eigen::VectorXd d = min_norm_in_hull(gmat);
    const double dn = d.norm();
    if (dn < 1e-12) break;  // zero in the supergradient hull: globally optimal
    d /= dn;

    const Eigen::VectorXd trial = v + step * d;
    const double ft = feval(trial);
    if (ft > f) {
      v = trial;
      f = ft;
      step *= 1.6;
    } else {
      step *= 0.4;
    }
  }
  return f;
}

}  // namespace detail

// Bisection on the margin between a feasible floor (v = 0 is feasible at
// t = min lambda_min(F0)) and an infeasible ceiling found by doubling. The
// reported optimum is the best exact certificate margin collected across all
// probes — polished by eigenvector ascent — so it is a rigorous lower bound
// on t*; the bracket width bounds it from above.
inline LmiMarginResult solve_lmi_margin_bisection(const LmiMarginProblem& prob, double resolution = 1e-7,
                                                  int max_sweeps = 20000) {
  const int p = static_cast<int>(prob.fi.size());

  LmiMarginResult res;
  res.v = Eigen::VectorXd::Zero(std::max(p, 1));

  double t_lo = 1e300;
  for (const auto& f : prob.f0) t_lo = std::min(t_lo, detail::min_eig_sym(f));
  Eigen::VectorXd v_best = Eigen::VectorXd::Zero(std::max(p, 1));
  // the v = 0 completion realizes t_lo exactly

  // ascend from the origin before bracketing: the bundle method is most
  // reliable started away from the cone boundary, and the tighter floor
  // keeps the final answer from resting on a stalled late-stage iterate
  if (p > 0) {
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(p);
    const double f0 = detail::polish_certificate(prob, v0);
    if (f0 > t_lo) {
      t_lo = f0;
      v_best = v0;
    }
  }

  // the ascent floor usually sits within a few resolutions of the optimum,
  // so try a narrow ceiling before the wide doubling schedule — every probe
  // above the optimum costs the oracle its whole sweep budget
  bool bracketed = false;
  double t_hi = t_lo + 64.0 * resolution;
  {
    FeasibilityCheck fc = lmi_feasible_at(prob, t_hi, max_sweeps);
    if (fc.best_margin > t_lo) {
      t_lo = fc.best_margin;
      v_best = fc.v;
    }
    bracketed = !fc.feasible;
  }

  if (!bracketed) {
    double step = 1.0;
    t_hi = std::max(t_hi, t_lo) + step;
    int guard = 0;
    for (;;) {
      FeasibilityCheck fc = lmi_feasible_at(prob, t_hi, max_sweeps);
      if (fc.best_margin > t_lo) {
        t_lo = fc.best_margin;
        v_best = fc.v;
      }
      if (!fc.feasible) break;
      step *= 2.0;
      t_hi = std::max(t_hi, t_lo) + step;
      if (++guard > 60) {
        res.status = SolverStatus::NumericalFailure;  // unbounded margin: malformed problem
        return res;
      }
    }
  }

  int iters = 0;
  while (t_hi - t_lo > resolution) {
    const double mid = 0.5 * (t_lo + t_hi);
    FeasibilityCheck fc = lmi_feasible_at(prob, mid, max_sweeps);
    if (fc.best_margin > t_lo) {
      t_lo = fc.best_margin;
      v_best = fc.v;
    }
    if (fc.feasible) {
      t_lo = std::max(t_lo, mid);
    } else {
      if (mid <= t_lo) break;  // certificate overtook the probe level; bracket is stale
      t_hi = mid;
    }
    ++iters;
  }

  if (p > 0) {
    Eigen::VectorXd vp = v_best;
    const double fp = detail::polish_certificate(prob, vp);
    if (fp > t_lo) {
      t_lo = fp;
      v_best = vp;
    }
  }

  res.t_star = t_lo;
  res.v = v_best;
  res.gap = std::max(t_hi - t_lo, 0.0);
  res.iterations = iters;
  res.status = SolverStatus::Converged;
  return res;
}

}
