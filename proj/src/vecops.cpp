#include "adscout/vecops.hpp"

#if defined(__x86_64__)
#include <immintrin.h>
#elif defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace adscout::vecops {

float dot_scalar(const float* a, const float* b, size_t n) {
    float acc = 0.0f;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void batch_dot_scalar(const float* query, const float* base, size_t count, size_t dim, float* out) {
    for (size_t i = 0; i < count; ++i) {
        out[i] = dot_scalar(query, base + i * dim, dim);
    }
}

#if defined(__x86_64__)

__attribute__((target("avx2,fma"))) static float dot_avx2(const float* a, const float* b, size_t n) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    }
    acc0 = _mm256_add_ps(acc0, acc1);
    __m128 lo = _mm256_castps256_ps128(acc0);
    __m128 hi = _mm256_extractf128_ps(acc0, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_hadd_ps(lo, lo);
    lo = _mm_hadd_ps(lo, lo);
    float acc = _mm_cvtss_f32(lo);
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

__attribute__((target("avx2,fma"))) static void batch_dot_avx2(const float* query, const float* base,
                                                               size_t count, size_t dim, float* out) {
    for (size_t i = 0; i < count; ++i) {
        out[i] = dot_avx2(query, base + i * dim, dim);
    }
}

static bool have_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#elif defined(__aarch64__)

static float dot_neon(const float* a, const float* b, size_t n) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    }
    float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

static void batch_dot_neon(const float* query, const float* base, size_t count, size_t dim,
                           float* out) {
    for (size_t i = 0; i < count; ++i) {
        out[i] = dot_neon(query, base + i * dim, dim);
    }
}

#endif

namespace {

struct Dispatch {
    KernelKind kind = KernelKind::Scalar;
    float (*dot_fn)(const float*, const float*, size_t) = dot_scalar;
    void (*batch_fn)(const float*, const float*, size_t, size_t, float*) = batch_dot_scalar;
};

Dispatch resolve() {
    Dispatch d;
#if defined(__x86_64__)
    if (have_avx2()) {
        d.kind = KernelKind::Avx2;
        d.dot_fn = dot_avx2;
        d.batch_fn = batch_dot_avx2;
    }
#elif defined(__aarch64__)
    d.kind = KernelKind::Neon;
    d.dot_fn = dot_neon;
    d.batch_fn = batch_dot_neon;
#endif
    return d;
}

const Dispatch& dispatch() {
    static const Dispatch d = resolve();
    return d;
}

} // namespace

KernelKind active_kernel() { return dispatch().kind; }

std::string kernel_name() {
    switch (dispatch().kind) {
        case KernelKind::Avx2: return "avx2";
        case KernelKind::Neon: return "neon";
        default: return "scalar";
    }
}

float dot(const float* a, const float* b, size_t n) { return dispatch().dot_fn(a, b, n); }

void batch_dot(const float* query, const float* base, size_t count, size_t dim, float* out) {
    dispatch().batch_fn(query, base, count, dim, out);
}

} // namespace adscout::vecops
