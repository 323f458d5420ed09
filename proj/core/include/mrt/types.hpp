#pragma once

#include <complex>
#include <span>
#include <vector>

namespace mrt {

using Complex = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<Complex>;

// Hard cap on the spatial/tensor dimension; keeps stack buffers bounded.
inline constexpr int kMaxDim = 8;

inline constexpr Complex kI{0.0, 1.0};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Bilinear (non-Hermitian) dot product w.w used by null-vector identities.
Complex cdot(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace mrt
