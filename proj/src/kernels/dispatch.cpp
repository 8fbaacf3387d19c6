#include "impuritykit/kernels.hpp"

#include <cstring>

namespace impkit::kernels {

#if defined(IMPURITY_KIT_HAVE_AVX2)
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#if defined(IMPURITY_KIT_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {
const Ops* g_current = nullptr;

const Ops* best() {
    if (const Ops* v = avx2_ops()) return v;
    return &scalar_ops();
}
}  // namespace

const Ops& ops() {
    if (!g_current) g_current = best();
    return *g_current;
}

bool select(const char* name) {
    if (std::strcmp(name, "auto") == 0) {
        g_current = best();
        return true;
    }
    if (std::strcmp(name, "scalar") == 0) {
        g_current = &scalar_ops();
        return true;
    }
    if (std::strcmp(name, "avx2") == 0) {
        if (const Ops* v = avx2_ops()) {
            g_current = v;
            return true;
        }
        return false;
    }
    return false;
}

}  // namespace impkit::kernels
