#pragma once

namespace onlinefwer {

/// Standard normal cumulative distribution function Phi(z).
double normal_cdf(double z) noexcept;

/// Standard normal density phi(z).
double normal_pdf(double z) noexcept;

/// Standard normal quantile Phi^{-1}(p).
/// Inputs are clamped to [1e-300, 1 - 1e-16] before inversion so the
/// result is always finite.
double normal_quantile(double p) noexcept;

}  // namespace onlinefwer
