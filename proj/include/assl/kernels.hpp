#pragma once

// Dense double-precision inner loops shared by the network, k-means++ and
// k-center selection. Each kernel has a scalar reference implementation and
// SIMD variants; the variant is chosen once per process from the CPU's
// capabilities (override with ASSL_ISA=scalar|avx2|neon).

#include <cstddef>
#include <span>
#include <string_view>

namespace assl::kernels {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
    Isa isa;
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // out[r] = bias[r] + <w[r, :], x> for a row-major rows x cols matrix
    void (*matvec_bias)(const double* w, std::size_t rows, std::size_t cols, const double* x,
                        const double* bias, double* out);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

/// Best variant supported by this CPU, honouring ASSL_ISA.
const KernelTable& active() noexcept;

/// Replace the active table for the rest of the process (tests, benchmarks).
/// Not thread-safe; call before spawning workers.
void set_active(const KernelTable& table) noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) noexcept {
    return active().sq_dist(a.data(), b.data(), a.size());
}

}  // namespace assl::kernels
