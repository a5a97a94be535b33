#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace qclock::detail {

constexpr bool is_pow2(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 transform; data.size() must be a power of two.
// sign = -1: forward, sign = +1: inverse (unnormalized, caller divides by n).
void fft_pow2(std::vector<std::complex<double>>& data, int sign);

}  // namespace qclock::detail
