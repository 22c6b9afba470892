#pragma once

#include <cstddef>
#include <cstdint>

#include "ratm/model.hpp"

// Row-level arithmetic used by the Bellman backups and belief expectations.
// Scalar reference implementations live in kernels::scalar; an AVX2 variant
// is selected at runtime when the CPU supports it. The two are equivalence-
// tested against each other.

namespace ratm::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double dot_indexed(const double* values, const state_id* idx, const double* w, std::size_t n);
double max_value(const double* a, std::size_t n);
void axpy(double* dst, const double* src, double scale, std::size_t n);
} // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double dot_indexed(const double* values, const state_id* idx, const double* w, std::size_t n);
double max_value(const double* a, std::size_t n);
void axpy(double* dst, const double* src, double scale, std::size_t n);
} // namespace avx2
#endif

/// Sum of a[i] * b[i].
extern double (*dot)(const double* a, const double* b, std::size_t n);

/// Sum of w[i] * values[idx[i]] (gathered dot product over a sparse row).
extern double (*dot_indexed)(const double* values, const state_id* idx, const double* w,
                             std::size_t n);

/// Maximum element; -infinity on an empty range.
extern double (*max_value)(const double* a, std::size_t n);

/// dst[i] += scale * src[i].
extern void (*axpy)(double* dst, const double* src, double scale, std::size_t n);

/// True when the AVX2 variants were selected.
bool using_avx2();

} // namespace ratm::kernels
