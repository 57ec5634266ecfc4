#pragma once

#include <complex>
#include <span>
#include <vector>

namespace painbvp::detail {

/// Real-to-complex DFT of x zero-padded to nfft; returns nfft/2 + 1 bins.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft);

/// Inverse of rfft (unnormalised, like FFTW): returns nfft real samples.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t nfft);

std::size_t next_pow2(std::size_t n);

}  // namespace painbvp::detail
