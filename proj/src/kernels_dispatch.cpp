#include "assl/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace assl::kernels {

#if !defined(ASSL_HAVE_AVX2)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif
#if !defined(ASSL_HAVE_NEON)
const KernelTable* neon_table() noexcept { return nullptr; }
#endif

namespace {

const KernelTable* select_default() noexcept {
    if (const char* env = std::getenv("ASSL_ISA")) {
        const std::string_view want{env};
        if (want == "scalar") return &scalar_table();
        if (want == "avx2" && avx2_table()) return avx2_table();
        if (want == "neon" && neon_table()) return neon_table();
    }
    if (const KernelTable* t = avx2_table()) return t;
    if (const KernelTable* t = neon_table()) return t;
    return &scalar_table();
}

const KernelTable*& current() noexcept {
    static const KernelTable* table = select_default();
    return table;
}

}  // namespace

const KernelTable& active() noexcept { return *current(); }

void set_active(const KernelTable& table) noexcept { current() = &table; }

}  // namespace assl::kernels
