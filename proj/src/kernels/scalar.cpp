#include <cmath>

#include "eedc/kernels.hpp"

namespace eedc::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += x[i] * y[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double alpha, const double* x, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] = alpha * x[i];
}

void affine_scalar(double r, const double* a, const double* b, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    const double ra = r * a[i];
    out[i] = ra - b[i];
  }
}

void tridiag_scalar(const double* lo, const double* di, const double* up, const double* x,
                    double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    double s = di[i] * x[i];
    if (i > 0) s += lo[i] * x[i - 1];
    if (i + 1 < len) s += up[i] * x[i + 1];
    y[i] = s;
  }
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t len) {
  double m = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = std::fabs(x[i] - y[i]);
    if (d > m || std::isnan(d)) m = d;
  }
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar",      dot_scalar,     axpy_scalar,
                                 scale_scalar,  affine_scalar,  tridiag_scalar,
                                 max_abs_diff_scalar};
  return table;
}

}  // namespace eedc::kernels
