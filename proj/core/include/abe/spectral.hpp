#pragma once

#include <memory>
#include <vector>

#include "abe/field.hpp"

namespace abe {

/// 2D discrete Fourier transform on a GridSpec (FFTW backed).
///
/// forward() is unnormalized, backward() divides by N1*N2, so
/// backward(forward(f)) == f. Plans are created with FFTW_ESTIMATE, which keeps
/// results bit-reproducible from run to run.
class SpectralTransform {
 public:
  explicit SpectralTransform(const GridSpec& grid);
  ~SpectralTransform();
  SpectralTransform(SpectralTransform&&) noexcept;
  SpectralTransform& operator=(SpectralTransform&&) noexcept;
  SpectralTransform(const SpectralTransform&) = delete;
  SpectralTransform& operator=(const SpectralTransform&) = delete;

  const GridSpec& grid() const;

  void forward(ComplexField& f);
  void backward(ComplexField& f);

  /// Angular wavenumbers 2*pi*fftfreq along each axis.
  const std::vector<double>& k1() const;
  const std::vector<double>& k2() const;

  /// f <- IFFT(multiplier .* FFT(f)), multiplier in FFT storage order.
  void apply_multiplier(ComplexField& f, const std::vector<Complex>& multiplier);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// L2 norm computed from the spectrum (Parseval): sqrt(dA/N * sum |F_k|^2).
double spectral_l2_norm(const ComplexField& f);

}  // namespace abe
