#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "abe/error.hpp"
#include "abe/spectral.hpp"
#include "abe/states.hpp"

using namespace abe;

namespace {

const double no_limit = std::numeric_limits<double>::infinity();

GridSpec base() { return GridSpec{16.0, 32.0, 256, 512, 0.0}; }

// Superposition of a few Fourier modes with |k| below `kmax`.
ComplexField banded_field(const GridSpec& g, double kmax, std::mt19937& rng) {
  SpectralTransform fft(g);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField spec(g);
  for (std::size_t i = 0; i < g.points1; ++i)
    for (std::size_t j = 0; j < g.points2; ++j)
      if (std::hypot(fft.k1()[i], fft.k2()[j]) <= kmax) spec(i, j) = {n(rng), n(rng)};
  fft.backward(spec);
  return spec;
}

}  // namespace

TEST_SUITE("states") {
  TEST_CASE("envelope shape, support and normalization") {
    const GridSpec g = base();
    const Envelope env = make_envelope(2.5, g, 3.0);
    CHECK(l2_norm(env.samples) == doctest::Approx(1.0).epsilon(1e-12));
    double largest = 0.0;
    for (std::size_t i = 0; i < g.points1; ++i)
      for (std::size_t j = 0; j < g.points2; ++j) {
        const double r = std::hypot(g.x1(i), g.x2(j));
        const Complex value = env.samples(i, j);
        if (r >= 2.5) CHECK(value == Complex{0.0, 0.0});
        largest = std::max(largest, std::abs(value));
        const double s = 1.0 - r * r / 6.25;
        if (r < 2.5) CHECK(value.real() == doctest::Approx(env.peak * s * s * s).epsilon(1e-14));
      }
    CHECK(largest <= env.peak);
    CHECK(bump_c2_profile(2.5 / std::sqrt(2.0), 2.5) == doctest::Approx(0.125).epsilon(1e-14));
    const Envelope half = make_envelope(2.5, g, 3.0, EnvelopeKind::bump_c2, 0.5);
    CHECK(l2_norm(half.samples) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("peak converges to the continuum normalization") {
    // Continuum: c^2 * 2 pi * R^2 / 14 = 1 for (1 - r^2/R^2)^3.
    const double R = 2.5;
    const double oracle = std::sqrt(14.0 / (2.0 * std::numbers::pi * R * R));
    const double coarse = make_envelope(R, GridSpec{16.0, 32.0, 128, 256, 0.0}, 3.0).peak;
    const double fine = make_envelope(R, GridSpec{16.0, 32.0, 512, 1024, 0.0}, 3.0).peak;
    CHECK(std::abs(fine - oracle) < std::abs(coarse - oracle) + 1e-15);
    CHECK(fine == doctest::Approx(oracle).epsilon(1e-5));
  }

  TEST_CASE("envelope is radially symmetric") {
    const GridSpec g = base();
    const Envelope env = make_envelope(2.5, g, 3.0);
    for (std::size_t i = 0; i < g.points1; ++i)
      for (std::size_t j = 0; j < g.points2; ++j) {
        // Nodes mirrored through both axes lie at the same radius.
        CHECK(env.samples(i, j) == env.samples(g.points1 - 1 - i, g.points2 - 1 - j));
      }
  }

  TEST_CASE("envelope preconditions") {
    const GridSpec g = base();
    CHECK_THROWS_WITH_AS(make_envelope(3.0, g, 3.0), doctest::Contains("R < L1 - L0"), ConfigError);
    CHECK_THROWS_AS(make_envelope(0.0, g, 3.0), ConfigError);
    CHECK_THROWS_AS(make_envelope(2.5, GridSpec{16.0, 32.0, 64, 128, 0.0}, 3.0), ResolutionError);
  }

  TEST_CASE("commensurate velocities") {
    const GridSpec g = base();
    const double dk = 2.0 * std::numbers::pi / 32.0;
    for (double v : {4.0, 5.66, 8.0, 11.31, 16.0}) {
      const double c = commensurate_velocity(v, 1.0, g);
      CHECK(std::abs(c - v) <= dk / 2.0 + 1e-12);
      CHECK(is_commensurate(c, 1.0, g));
    }
    CHECK_FALSE(is_commensurate(4.0, 1.0, g));
    CHECK_THROWS_AS(boost(ComplexField(g), 1.0, 4.0), ConfigError);
  }

  TEST_CASE("boost is unimodular, keeps the support and moves the spectral peak") {
    const GridSpec g = base();
    const Envelope env = make_envelope(2.5, g, 3.0);
    CHECK(max_abs_difference(boost(env.samples, 1.0, 0.0), env.samples) == 0.0);
    const double v = commensurate_velocity(8.0, 1.0, g);
    ComplexField b = boost(env.samples, 1.0, v);
    CHECK(l2_norm(b) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 0; k < g.size(); ++k) CHECK((b[k] == Complex{0.0, 0.0}) == (env.samples[k] == Complex{0.0, 0.0}));
    SpectralTransform fft(g);
    fft.forward(b);
    std::size_t best = 0;
    for (std::size_t k = 1; k < g.size(); ++k)
      if (std::abs(b[k]) > std::abs(b[best])) best = k;
    CHECK(fft.k1()[best / g.points2] == 0.0);
    CHECK(fft.k2()[best % g.points2] == doctest::Approx(v).epsilon(1e-12));
  }

  TEST_CASE("cutoff window radii") {
    for (double v : {4.0, 16.0}) {
      CHECK(cutoff_window(0.0, v, 1.0, {}) == 1.0);
      CHECK(cutoff_window(v / 32.0, v, 1.0, {}) == 1.0);
      CHECK(cutoff_window(v / 16.0, v, 1.0, {}) == 0.0);
      CHECK(cutoff_window(v, v, 1.0, {}) == 0.0);
    }
  }

  TEST_CASE("cutoff leaves plateau-band fields untouched and is idempotent away from the ramp") {
    std::mt19937 rng(99);
    const GridSpec g{64.0, 64.0, 128, 128, 0.0};
    for (double v : {16.0, 32.0}) {
      const ComplexField f = banded_field(g, v / 32.0, rng);
      const ComplexField once = momentum_cutoff(f, v, 1.0);
      CHECK(max_abs_difference(once, f) <= 1e-14 * (1.0 + l2_norm(f)));
      CHECK(max_abs_difference(momentum_cutoff(once, v, 1.0), once) <= 1e-14);
    }
  }

  TEST_CASE("cutoff is a contraction") {
    std::mt19937 rng(123);
    const GridSpec g{32.0, 32.0, 64, 64, 0.0};
    for (int trial = 0; trial < 10; ++trial) {
      std::normal_distribution<double> n(0.0, 1.0);
      ComplexField f(g);
      for (std::size_t k = 0; k < f.size(); ++k) f[k] = {n(rng), n(rng)};
      const ComplexField c = momentum_cutoff(f, 4.0 + trial, 1.0);
      CHECK(l2_norm(c) <= l2_norm(f) * (1.0 + 1e-14));
    }
  }

  TEST_CASE("cutoff distance scales like the H2 tail") {
    const GridSpec g{64.0, 64.0, 512, 512, 0.0};
    const Envelope env = make_envelope(2.5, g, no_limit);
    const double h2 = h2_norm(env.samples);
    double previous = 0.0;
    for (double v : {4.0, 8.0, 16.0}) {
      const double d = l2_norm(momentum_cutoff(env.samples, v, 1.0) - env.samples);
      if (previous > 0.0) CHECK(previous / d >= 3.5);
      previous = d;
    }
  }

  TEST_CASE("H2 norm examples") {
    const GridSpec g{8.0, 16.0, 32, 64, 0.0};
    CHECK(h2_norm(ComplexField(g)) == 0.0);
    SpectralTransform fft(g);
    const double k1 = fft.k1()[2], k2 = fft.k2()[5];
    ComplexField wave(g);
    for (std::size_t i = 0; i < g.points1; ++i)
      for (std::size_t j = 0; j < g.points2; ++j) wave(i, j) = std::polar(1.0, k1 * g.x1(i) + k2 * g.x2(j));
    CHECK(h2_norm(wave) == doctest::Approx((1.0 + k1 * k1 + k2 * k2) * l2_norm(wave)).epsilon(1e-12));
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      const ComplexField f = banded_field(g, 3.0, rng);
      CHECK(h2_norm(f) >= l2_norm(f));
    }
  }
}
