#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "cvqkd/coherent.hpp"
#include "cvqkd/entropy.hpp"
#include "cvqkd/fock.hpp"
#include "cvqkd/rng.hpp"
#include "cvqkd/units.hpp"

using namespace cvqkd;

namespace {

Amplitude random_amplitude(Xoshiro256pp& g, double max_mag) {
  // rejection-free: uniform in the disk via sqrt radius
  const double r = max_mag * std::sqrt(uniform_open01(g));
  const double t = 2.0 * std::numbers::pi * uniform_open01(g);
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

TEST_CASE("coherent overlap basics", "[coherent]") {
  SECTION("identity case") {
    Amplitude a{0.7, -0.3};
    auto o = coherent_overlap(a, a);
    REQUIRE(std::abs(o - 1.0) < 1e-14);
  }

  SECTION("antipodal real amplitudes give exp(-2 alpha^2)") {
    const double alpha = 0.58026;
    auto o = coherent_overlap(Amplitude{-alpha}, Amplitude{alpha});
    REQUIRE(std::abs(o.imag()) < 1e-15);
    // 0.58026 is itself a rounded amplitude, so the overlap reproduces 0.51
    // only to ~3e-5.
    REQUIRE(std::abs(o.real() - 0.51) < 5e-5);
    REQUIRE(std::abs(o.real() - std::exp(-2.0 * alpha * alpha)) < 1e-15);
  }

  SECTION("magnitude and conjugation symmetry") {
    auto g = make_stream(7, 0);
    for (int i = 0; i < 50; ++i) {
      Amplitude a = random_amplitude(g, 2.0);
      Amplitude b = random_amplitude(g, 2.0);
      auto oab = coherent_overlap(a, b);
      auto oba = coherent_overlap(b, a);
      const double dr = a.re - b.re, di = a.im - b.im;
      REQUIRE(std::abs(std::abs(oab) - std::exp(-0.5 * (dr * dr + di * di))) < 1e-14);
      REQUIRE(std::abs(oab - std::conj(oba)) < 1e-14);
    }
  }

  SECTION("agrees with the Fock-basis inner product") {
    auto g = make_stream(11, 0);
    for (int i = 0; i < 40; ++i) {
      Amplitude a = random_amplitude(g, 2.0);
      Amplitude b = random_amplitude(g, 2.0);
      auto oracle = fock_inner(fock_coefficients(b), fock_coefficients(a));
      REQUIRE(std::abs(coherent_overlap(a, b) - oracle) < 1e-10);
    }
  }
}

TEST_CASE("fock coefficients", "[fock]") {
  SECTION("vacuum") {
    auto v = fock_coefficients(Amplitude{0.0}, 8);
    REQUIRE(std::abs(v.coefficients[0] - 1.0) < 1e-15);
    for (size_t n = 1; n < v.coefficients.size(); ++n) {
      REQUIRE(std::abs(v.coefficients[n]) == 0.0);
    }
  }

  SECTION("norm closes at moderate cutoff") {
    auto v = fock_coefficients(Amplitude{1.0}, 40);
    REQUIRE(std::abs(fock_norm_sq(v) - 1.0) < 1e-12);
  }

  SECTION("dot product reproduces the overlap") {
    const double alpha = 0.58026;
    auto va = fock_coefficients(Amplitude{alpha});
    auto vb = fock_coefficients(Amplitude{-alpha});
    auto dot = fock_inner(vb, va);
    auto direct = coherent_overlap(Amplitude{alpha}, Amplitude{-alpha});
    REQUIRE(std::abs(dot - direct) < 1e-10);
  }

  SECTION("guards") {
    REQUIRE_THROWS_AS(fock_coefficients(Amplitude{3.0}, 8), std::domain_error);  // |a|^2 = 9 > 8
    REQUIRE_THROWS_AS(fock_coefficients(Amplitude{0.5}, 0), std::domain_error);
  }
}

TEST_CASE("Q function of a coherent state", "[coherent]") {
  SECTION("peak value and location") {
    REQUIRE(std::abs(q_value_coherent(Amplitude{0.0}, Amplitude{0.0}) - 1.0 / std::numbers::pi) < 1e-15);
    Amplitude c{1.3, -0.4};
    REQUIRE(std::abs(q_value_coherent(c, c) - 1.0 / std::numbers::pi) < 1e-15);
    REQUIRE(q_value_coherent(c, Amplitude{0.0}) < 1.0 / std::numbers::pi);
  }

  SECTION("normalizes to 1 over phase space") {
    // Tensor Simpson over [-8,8]^2; the mass outside that square is below
    // 1e-15 for any center with |c| <= 2, so the domain choice is immaterial.
    Amplitude c{0.9, 0.7};
    const int n = 800;  // even
    const double lo = -8.0, hi = 8.0, h = (hi - lo) / n;
    auto w1 = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        sum += w1(i) * w1(j) * q_value_coherent(c, Amplitude{lo + i * h, lo + j * h});
      }
    }
    sum *= h * h / 9.0;
    REQUIRE(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("binary entropy", "[entropy]") {
  REQUIRE(binary_entropy(0.5) == 1.0);
  REQUIRE(binary_entropy(0.0) == 0.0);
  REQUIRE(binary_entropy(1.0) == 0.0);
  REQUIRE(std::abs(binary_entropy(0.11) - 0.49992) < 1e-5);  // H2(0.11) = 0.4999160

  SECTION("symmetry") {
    for (double p = 0.01; p < 0.5; p += 0.037) {
      REQUIRE(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-14);
    }
  }

  SECTION("domain") {
    REQUIRE_THROWS_AS(binary_entropy(-0.01), std::domain_error);
    REQUIRE_THROWS_AS(binary_entropy(1.01), std::domain_error);
  }
}

TEST_CASE("Holevo bound of a two-pure-state ensemble", "[entropy]") {
  SECTION("degenerate cases") {
    REQUIRE(holevo_two_pure(1.0, 0.3) == 0.0);
    REQUIRE(std::abs(holevo_two_pure(0.0, 0.5) - 1.0) < 1e-15);
  }

  SECTION("eigenvalue formula at overlap 0.8") {
    REQUIRE(std::abs(holevo_two_pure(0.8, 0.5) - binary_entropy(0.9)) < 1e-15);
    REQUIRE(std::abs(holevo_two_pure(0.8, 0.5) - 0.46900) < 5e-6);
  }

  SECTION("matches the Fock-basis density-matrix entropy") {
    // Pick coherent amplitudes +-g with <-g|+g> equal to the target overlap.
    for (double kappa : {0.8, 0.51, 0.3}) {
      const double gmag = std::sqrt(-std::log(kappa) / 2.0);
      auto up = fock_coefficients(Amplitude{gmag});
      auto dn = fock_coefficients(Amplitude{-gmag});
      for (double prior : {0.5, 0.9, 0.25}) {
        const double oracle = fock_mixture_entropy_bits({prior, 1.0 - prior}, {up, dn});
        REQUIRE(std::abs(holevo_two_pure(kappa, prior) - oracle) < 1e-9);
      }
    }
  }

  SECTION("monotone decreasing in the overlap at balanced prior") {
    double prev = holevo_two_pure(0.0, 0.5);
    for (double k = 0.01; k <= 1.0 + 1e-12; k += 0.01) {
      const double cur = holevo_two_pure(std::min(k, 1.0), 0.5);
      REQUIRE(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("unit conversion", "[units]") {
  MomentSet m;
  m.mean_x = 0.8206;
  m.mean_y = -0.013;
  m.var_x = 1.008;
  m.var_y = 0.991;
  m.cov_xy = 0.004;
  m.convention = UnitConvention::ShotNoiseUnits;
  m.n_samples = 125000;

  SECTION("round trip is the identity") {
    MomentSet r = to_snu(to_natural(m));
    REQUIRE(std::abs(r.mean_x - m.mean_x) < 1e-14);
    REQUIRE(std::abs(r.mean_y - m.mean_y) < 1e-14);
    REQUIRE(std::abs(r.var_x - m.var_x) < 1e-14);
    REQUIRE(std::abs(r.var_y - m.var_y) < 1e-14);
    REQUIRE(std::abs(r.cov_xy - m.cov_xy) < 1e-14);
    REQUIRE(r.n_samples == m.n_samples);
  }

  SECTION("variance ratios are convention independent") {
    MomentSet vac = m;
    vac.var_x = 1.0;
    MomentSet mn = to_natural(m), vacn = to_natural(vac);
    const double e_snu = m.var_x / vac.var_x - 1.0;
    const double e_nat = mn.var_x / vacn.var_x - 1.0;
    REQUIRE(std::abs(e_snu - e_nat) < 1e-14);
  }

  SECTION("moment set validation") {
    REQUIRE_NOTHROW(validate_moment_set(m));
    MomentSet bad = m;
    bad.var_x = -0.1;
    REQUIRE_THROWS_AS(validate_moment_set(bad), std::domain_error);
    bad = m;
    bad.cov_xy = 2.0;
    REQUIRE_THROWS_AS(validate_moment_set(bad), std::domain_error);
  }

  SECTION("vacuum heterodyne variance maps 1/2 natural to 1 SNU") {
    MomentSet vac_nat;
    vac_nat.var_x = 0.5;
    vac_nat.var_y = 0.5;
    vac_nat.convention = UnitConvention::Natural;
    MomentSet vac_snu = to_snu(vac_nat);
    REQUIRE(std::abs(vac_snu.var_x - 1.0) < 1e-15);
    REQUIRE(std::abs(vac_snu.var_y - 1.0) < 1e-15);
  }
}

TEST_CASE("seeded random streams", "[rng]") {
  SECTION("determinism and stream separation") {
    auto a1 = make_stream(42, 3);
    auto a2 = make_stream(42, 3);
    auto b = make_stream(42, 4);
    bool any_diff = false;
    for (int i = 0; i < 64; ++i) {
      auto x = a1.next();
      REQUIRE(x == a2.next());
      if (x != b.next()) any_diff = true;
    }
    REQUIRE(any_diff);
  }

  SECTION("named streams differ from bare chunk streams") {
    auto plain = make_stream(42, 0);
    auto named = make_named_stream(42, "sampler", 0);
    REQUIRE(plain.next() != named.next());
  }

  SECTION("uniforms live in (0,1]") {
    auto g = make_stream(1, 0);
    for (int i = 0; i < 10000; ++i) {
      const double u = uniform_open01(g);
      REQUIRE(u > 0.0);
      REQUIRE(u <= 1.0);
    }
  }

  SECTION("gaussian pair moments") {
    auto g = make_stream(2026, 0);
    const int n = 500000;
    double s = 0.0, s2 = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
      auto [z0, z1] = gaussian_pair(g);
      s += z0 + z1;
      s2 += z0 * z0 + z1 * z1;
      cross += z0 * z1;
    }
    const double mean = s / (2.0 * n);
    const double var = s2 / (2.0 * n) - mean * mean;
    REQUIRE(std::abs(mean) < 4.0 / std::sqrt(2.0 * n));
    REQUIRE(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / (2.0 * n)));
    REQUIRE(std::abs(cross / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  }
}
