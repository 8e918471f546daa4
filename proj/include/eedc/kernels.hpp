#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace eedc::kernels {

// Vector primitives used on the hot paths: stationary/profit dot products,
// the potential back-substitution, residual checks and the row recursion
// that assembles the explicit inverse. Each backend fills one table.
struct KernelTable {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t len);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t len);
  // y = alpha * x
  void (*scale)(double alpha, const double* x, double* y, std::size_t len);
  // out = r * a - b; one multiply and one subtract per entry, never fused,
  // so every backend returns the same bits.
  void (*affine)(double r, const double* a, const double* b, double* out, std::size_t len);
  // y[i] = lo[i] * x[i-1] + di[i] * x[i] + up[i] * x[i+1], missing ends read as 0.
  void (*tridiag)(const double* lo, const double* di, const double* up, const double* x,
                  double* y, std::size_t len);
  double (*max_abs_diff)(const double* x, const double* y, std::size_t len);
};

const KernelTable& scalar_table();
/// Null when the build or the running CPU lacks AVX2 and FMA.
const KernelTable* avx2_table();
/// Backend picked at first use: AVX2 when available, unless the
/// environment variable EEDC_KERNELS=scalar forces the reference path.
const KernelTable& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void scale(double alpha, std::span<const double> x, std::span<double> y) {
  active().scale(alpha, x.data(), y.data(), x.size());
}
inline void affine(double r, std::span<const double> a, std::span<const double> b,
                   std::span<double> out) {
  active().affine(r, a.data(), b.data(), out.data(), a.size());
}
inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  return active().max_abs_diff(x.data(), y.data(), x.size());
}

}  // namespace eedc::kernels
