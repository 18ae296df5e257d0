#include "abe/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace abe {
namespace {

// The FFTW planner is not reentrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> angular_frequencies(std::size_t n, double extent) {
  std::vector<double> k(n);
  const double dk = 2.0 * std::numbers::pi / extent;
  const auto half = static_cast<long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<long>(i);
    k[i] = dk * static_cast<double>(s < half ? s : s - static_cast<long>(n));
  }
  return k;
}

}  // namespace

struct SpectralTransform::Impl {
  GridSpec grid;
  std::vector<double> k1, k2;
  fftw_complex* scratch = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit Impl(const GridSpec& g)
      : grid(g), k1(angular_frequencies(g.points1, g.extent1)), k2(angular_frequencies(g.points2, g.extent2)) {
    const int n1 = static_cast<int>(g.points1);
    const int n2 = static_cast<int>(g.points2);
    std::lock_guard lock(planner_mutex());
    scratch = fftw_alloc_complex(g.size());
    auto* out = fftw_alloc_complex(g.size());
    constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd = fftw_plan_dft_2d(n1, n2, scratch, out, FFTW_FORWARD, flags);
    bwd = fftw_plan_dft_2d(n1, n2, scratch, out, FFTW_BACKWARD, flags);
    fftw_free(out);
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(scratch);
  }

  void run(fftw_plan plan, ComplexField& f) {
    auto* data = reinterpret_cast<fftw_complex*>(f.data());
    std::copy(f.data(), f.data() + f.size(), reinterpret_cast<Complex*>(scratch));
    fftw_execute_dft(plan, scratch, data);
  }
};

SpectralTransform::SpectralTransform(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
SpectralTransform::~SpectralTransform() = default;
SpectralTransform::SpectralTransform(SpectralTransform&&) noexcept = default;
SpectralTransform& SpectralTransform::operator=(SpectralTransform&&) noexcept = default;

const GridSpec& SpectralTransform::grid() const { return impl_->grid; }
const std::vector<double>& SpectralTransform::k1() const { return impl_->k1; }
const std::vector<double>& SpectralTransform::k2() const { return impl_->k2; }

void SpectralTransform::forward(ComplexField& f) { impl_->run(impl_->fwd, f); }

void SpectralTransform::backward(ComplexField& f) {
  impl_->run(impl_->bwd, f);
  f *= 1.0 / static_cast<double>(f.size());
}

void SpectralTransform::apply_multiplier(ComplexField& f, const std::vector<Complex>& multiplier) {
  forward(f);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] *= multiplier[k];
  backward(f);
}

double spectral_l2_norm(const ComplexField& f) {
  ComplexField spectrum = f;
  SpectralTransform(f.grid()).forward(spectrum);
  double sum = 0.0;
  for (const auto& z : spectrum.values()) sum += std::norm(z);
  return std::sqrt(sum * f.grid().cell_area() / static_cast<double>(f.size()));
}

}  // namespace abe
