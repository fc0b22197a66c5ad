#include "assl/kernels.hpp"

namespace assl::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sq_dist_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void matvec_bias_scalar(const double* w, std::size_t rows, std::size_t cols, const double* x,
                        const double* bias, double* out) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static const KernelTable table{Isa::Scalar, "scalar", dot_scalar, axpy_scalar, sq_dist_scalar,
                                   matvec_bias_scalar};
    return table;
}

}  // namespace assl::kernels
