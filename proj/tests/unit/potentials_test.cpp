#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "abe/error.hpp"
#include "abe/potentials.hpp"

using namespace abe;

namespace {

// Antiderivative of A (1 - (z/L)^2)^2 from -L, in closed form.
double quartic_primitive(double A, double L, double z) {
  const double u = std::clamp(z / L, -1.0, 1.0);
  auto P = [](double s) { return s - 2.0 * s * s * s / 3.0 + s * s * s * s * s / 5.0; };
  return A * L * (P(u) - P(-1.0));
}

// Composite Simpson, used only as an independent check of the library quadrature.
template <typename F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

PulseProfile quartic(double A, double L) { return {A, L, PulseShape::quartic_bump}; }

}  // namespace

TEST_SUITE("potentials") {
  TEST_CASE("pulse values") {
    const PulseProfile p = quartic(1.0, 1.0);
    CHECK(eval_Q0(p, 0.0) == 1.0);
    // Horner form of the same polynomial as an independent evaluation.
    const double z = 0.5;
    const double horner = 1.0 + z * z * (-2.0 + z * z);
    CHECK(eval_Q0(p, z) == doctest::Approx(horner).epsilon(1e-15));
    CHECK(eval_Q0(p, z) == doctest::Approx(0.5625).epsilon(1e-15));
    for (auto shape : {PulseShape::quartic_bump, PulseShape::smooth_plateau}) {
      const PulseProfile q{1.7, 2.0, shape};
      for (double s : {2.0, -2.0, 4.0, -4.0, 2.0 + 1e-12}) CHECK(eval_Q0(q, s) == 0.0);
    }
    const PulseProfile plateau{1.3, 2.0, PulseShape::smooth_plateau};
    for (double s : {-1.0, -0.3, 0.0, 0.9, 1.0}) CHECK(eval_Q0(plateau, s) == doctest::Approx(1.3));
  }

  TEST_CASE("pulse is C1 at the support edge") {
    const PulseProfile p = quartic(1.0, 2.0);
    double previous = 0.0;
    for (double h = 1e-2; h > 1e-5; h /= 2.0) {
      const double ratio = eval_Q0(p, 2.0 - h) / h;
      if (previous > 0.0) CHECK(ratio == doctest::Approx(previous / 2.0).epsilon(0.01));
      previous = ratio;
    }
  }

  TEST_CASE("pulse and its derivative stay bounded") {
    for (auto shape : {PulseShape::quartic_bump, PulseShape::smooth_plateau}) {
      const PulseProfile p{1.0, 2.0, shape};
      double bound = 0.0;
      const double h = 1e-6;
      for (double z = -3.0; z <= 3.0; z += 1e-3) {
        const double d = (eval_Q0(p, z + h) - eval_Q0(p, z - h)) / (2.0 * h);
        bound = std::max(bound, std::abs(eval_Q0(p, z)) + std::abs(d));
      }
      CHECK(bound < 3.0);
    }
  }

  TEST_CASE("flux of the unit quartic is 16/15") {
    const PulseProfile p = quartic(1.0, 1.0);
    const double oracle = simpson([&](double z) { return 1.0 + z * z * (-2.0 + z * z); }, -1.0, 1.0, 2000);
    CHECK(std::abs(oracle - 16.0 / 15.0) < 1e-12);
    CHECK(std::abs(total_flux_phi(p) - oracle) < 1e-10);
    CHECK(std::abs(total_flux_phi(p) - quartic_primitive(1.0, 1.0, 1.0)) < 1e-12);
    CHECK(total_flux_phi(quartic(0.0, 1.0)) == 0.0);
  }

  TEST_CASE("F_minus follows the closed-form primitive") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> amp(0.1, 3.0), half(0.5, 3.0), vel(1.5, 40.0), tt(-1.0, 1.0);
    for (int k = 0; k < 300; ++k) {
      const PulseProfile p = quartic(amp(rng), half(rng));
      const double v = vel(rng);
      const double t = tt(rng) * 1.5 * p.half_support / v;
      const double phi = total_flux_phi(p);
      CHECK(std::abs(phase_F_minus(t, v, p) - quartic_primitive(p.amplitude, p.half_support, v * t)) < 1e-11);
      CHECK(std::abs(phase_F_plus(t, v, p) + phase_F_minus(t, v, p) - phi) < 1e-12);
    }
  }

  TEST_CASE("phase examples") {
    const PulseProfile p = quartic(1.0, 2.0);
    const double phi = total_flux_phi(p);
    const double v = 8.0;
    CHECK(phase_F_minus(-2.0 / v, v, p) == 0.0);
    CHECK(phase_F_minus(-1.0, v, p) == 0.0);
    CHECK(phase_F_minus(2.0 / v, v, p) == doctest::Approx(phi).epsilon(1e-13));
    CHECK(phase_F_minus(0.0, v, p) == doctest::Approx(phi / 2.0).epsilon(1e-13));
    CHECK(phase_F_plus(2.0 / v, v, p) == doctest::Approx(0.0));
    CHECK(phase_F_plus(-5.0, v, p) == doctest::Approx(phi).epsilon(1e-13));
    CHECK(phase_F_plus(0.0, v, p) + phase_F_minus(0.0, v, p) == doctest::Approx(phi).epsilon(1e-14));
  }

  TEST_CASE("F_minus is monotone and its total is velocity free") {
    const PulseProfile p{1.0, 2.0, PulseShape::smooth_plateau};
    const double phi = total_flux_phi(p);
    for (double v : {2.0, 4.0, 16.0, 64.0}) {
      CHECK(phase_F_minus(p.half_support / v, v, p) == doctest::Approx(phi).epsilon(1e-13));
      double previous = -1.0;
      for (double t = -3.0 / v; t <= 3.0 / v; t += 0.01 / v) {
        const double f = phase_F_minus(t, v, p);
        CHECK(f >= previous - 1e-14);
        previous = f;
      }
    }
  }

  TEST_CASE("flux is linear in the amplitude and calibration round-trips") {
    const PulseProfile p = quartic(1.0, 1.0);
    for (double c : {0.5, 2.0, 7.25})
      CHECK(std::abs(total_flux_phi(quartic(c, 1.0)) - c * total_flux_phi(p)) < 1e-12);
    CHECK(calibrate_amplitude_for_phase(std::numbers::pi / 2.0, p).amplitude ==
          doctest::Approx((std::numbers::pi / 2.0) / (16.0 / 15.0)).epsilon(1e-12));
    CHECK(calibrate_amplitude_for_phase(std::numbers::pi / 2.0, p).amplitude == doctest::Approx(1.472622).epsilon(1e-6));
    CHECK(calibrate_amplitude_for_phase(0.0, p).amplitude == 0.0);
    for (double x : {0.1, 1.0, 3.0})
      CHECK(std::abs(total_flux_phi(calibrate_amplitude_for_phase(x, quartic(0.3, 2.0))) - x) < 1e-10);
    CHECK_THROWS_AS(calibrate_amplitude_for_phase(1.0, quartic(1.0, 0.0)), ConfigError);
  }

  TEST_CASE("background values") {
    BackgroundSpec bg{0.1, 2.0, 0.0, true};
    CHECK(eval_V0(0.0, {0.0, 0.0}, bg) == doctest::Approx(0.1));
    bg = {1.0, 2.0, 0.0, true};
    CHECK(eval_V0(0.0, {9.0, 0.0}, bg) == doctest::Approx(0.01));
    CHECK(eval_V0(0.0, {0.0, -9.0}, bg) == doctest::Approx(0.01));
    bg = {1.0, 0.5, -1.0, true};
    CHECK(eval_V0(3.0, {0.0, 0.0}, bg) == doctest::Approx(0.25));

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    bg = {0.7, 1.3, 0.2, true};
    for (int k = 0; k < 1000; ++k) {
      const double t = u(rng);
      const Point x{u(rng), u(rng)};
      const double bound = 0.7 * std::pow(1.0 + std::abs(t), 0.2) * std::pow(1.0 + std::hypot(x.x1, x.x2), -1.3);
      CHECK(eval_V0(t, x, bg) == doctest::Approx(bound).epsilon(1e-13));
    }
  }

  TEST_CASE("background decay exponents are validated") {
    CHECK_THROWS_WITH_AS((BackgroundSpec{1.0, 1.0, 0.5, true}.validate()), doctest::Contains("rho - mu > 1"),
                         ConfigError);
    CHECK_THROWS_AS((BackgroundSpec{1.0, 0.0, -2.0, true}.validate()), ConfigError);
    CHECK_NOTHROW((BackgroundSpec{1.0, 0.5, -0.75, true}.validate()));
  }

  TEST_CASE("full potential examples") {
    const TubeSpec tube;
    ABPotentialSpec ab;
    ab.profile = quartic(1.3, 2.0);
    const BackgroundSpec off{0.1, 2.0, 0.0, false};
    const double v = 8.0;
    for (double t : {-0.2, 0.0, 0.1})
      for (Point x : {Point{0.0, 0.0}, Point{3.0, 4.0}, Point{-4.9, 0.5}})
        CHECK(eval_V(t, x, v, ab, off, tube) == doctest::Approx(v * eval_Q0(ab.profile, v * t)).epsilon(1e-15));
    for (Point x : {Point{6.5, 0.0}, Point{0.0, 12.5}, Point{10.0, 0.0}}) CHECK(eval_V(0.0, x, v, ab, off, tube) == 0.0);
    for (double t : {0.25, -0.25, 1.0}) CHECK(eval_V(t, {0.0, 0.0}, v, ab, off, tube) == 0.0);
  }

  TEST_CASE("taper is monotone and C1 between the radii") {
    ABPotentialSpec ab;
    CHECK(taper_weight(ab, {ab.taper_inner, 0.0}) == 1.0);
    CHECK(taper_weight(ab, {0.0, ab.taper_outer}) == 0.0);
    double previous = 1.0;
    for (double r = 0.0; r <= 7.0; r += 0.001) {
      const double w = taper_weight(ab, {r, 0.0});
      CHECK(w <= previous + 1e-15);
      previous = w;
    }
    ABPotentialSpec wide = ab;
    wide.taper_outer = 6.5;
    CHECK_THROWS_AS(wide.validate(TubeSpec{}), ConfigError);
  }
}
