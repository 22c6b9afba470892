#include "ratm/kernels.hpp"

#include <limits>

namespace ratm::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot_indexed(const double* values, const state_id* idx, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * values[idx[i]];
    return acc;
}

double max_value(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

void axpy(double* dst, const double* src, double scale, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += scale * src[i];
}

} // namespace scalar

namespace {

bool detect_avx2() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const bool g_use_avx2 = detect_avx2();

} // namespace

#if defined(__x86_64__)
double (*dot)(const double*, const double*, std::size_t) = g_use_avx2 ? avx2::dot : scalar::dot;
double (*dot_indexed)(const double*, const state_id*, const double*, std::size_t) =
    g_use_avx2 ? avx2::dot_indexed : scalar::dot_indexed;
double (*max_value)(const double*, std::size_t) = g_use_avx2 ? avx2::max_value
                                                             : scalar::max_value;
void (*axpy)(double*, const double*, double, std::size_t) = g_use_avx2 ? avx2::axpy
                                                                       : scalar::axpy;
#else
double (*dot)(const double*, const double*, std::size_t) = scalar::dot;
double (*dot_indexed)(const double*, const state_id*, const double*, std::size_t) =
    scalar::dot_indexed;
double (*max_value)(const double*, std::size_t) = scalar::max_value;
void (*axpy)(double*, const double*, double, std::size_t) = scalar::axpy;
#endif

bool using_avx2() { return g_use_avx2; }

} // namespace ratm::kernels
