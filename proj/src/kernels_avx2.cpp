// Compiled with -mavx2 in its own translation unit; only reached after the
// runtime cpuid check in kernels.cpp.
#if defined(__x86_64__)

#include <immintrin.h>

#include "ratm/kernels.hpp"

namespace ratm::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) total += a[i] * b[i];
    return total;
}

double dot_indexed(const double* values, const state_id* idx, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + i));
        const __m256d vv = _mm256_i32gather_pd(values, vi, 8);
        const __m256d vw = _mm256_loadu_pd(w + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(vw, vv));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) total += w[i] * values[idx[i]];
    return total;
}

double max_value(const double* a, std::size_t n) {
    if (n < 4) return scalar::max_value(a, n);
    __m256d best = _mm256_loadu_pd(a);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) best = _mm256_max_pd(best, _mm256_loadu_pd(a + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, best);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] > m) m = lanes[k];
    for (; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

void axpy(double* dst, const double* src, double scale, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(scale);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_loadu_pd(dst + i);
        const __m256d s = _mm256_loadu_pd(src + i);
        _mm256_storeu_pd(dst + i, _mm256_add_pd(d, _mm256_mul_pd(vs, s)));
    }
    for (; i < n; ++i) dst[i] += scale * src[i];
}

} // namespace ratm::kernels::avx2

#endif // __x86_64__
