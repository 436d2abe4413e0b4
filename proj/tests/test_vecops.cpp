#include "adscout/vecops.hpp"

#include "adscout/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace adscout;

namespace {

std::vector<float> random_vec(Rng& rng, size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.unit() * 2.0 - 1.0);
    return v;
}

} // namespace

TEST_CASE("dispatched dot agrees with the scalar reference") {
    INFO("active kernel: " << vecops::kernel_name());
    Rng rng(101);
    for (size_t n : {1u, 3u, 7u, 8u, 15u, 16u, 64u, 255u, 256u, 1000u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);
            const float reference = vecops::dot_scalar(a.data(), b.data(), n);
            const float fast = vecops::dot(a.data(), b.data(), n);
            const float tol = 1e-5f * (1.0f + std::abs(reference)) * static_cast<float>(std::sqrt(n));
            CHECK(std::abs(fast - reference) <= tol);
        }
    }
}

TEST_CASE("batch_dot matches per-row scalar results") {
    Rng rng(202);
    const size_t dim = 256;
    const size_t count = 97;
    std::vector<float> base;
    for (size_t i = 0; i < count; ++i) {
        const auto row = random_vec(rng, dim);
        base.insert(base.end(), row.begin(), row.end());
    }
    const auto query = random_vec(rng, dim);

    std::vector<float> fast(count);
    std::vector<float> reference(count);
    vecops::batch_dot(query.data(), base.data(), count, dim, fast.data());
    vecops::batch_dot_scalar(query.data(), base.data(), count, dim, reference.data());
    for (size_t i = 0; i < count; ++i) {
        CHECK(std::abs(fast[i] - reference[i]) <= 1e-4f * (1.0f + std::abs(reference[i])));
    }
}

TEST_CASE("simd path is exercised where the host supports it") {
#if defined(__x86_64__)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        CHECK(vecops::active_kernel() == vecops::KernelKind::Avx2);
    } else {
        CHECK(vecops::active_kernel() == vecops::KernelKind::Scalar);
    }
#elif defined(__aarch64__)
    CHECK(vecops::active_kernel() == vecops::KernelKind::Neon);
#else
    CHECK(vecops::active_kernel() == vecops::KernelKind::Scalar);
#endif
}

TEST_CASE("argmax of batched scores is kernel-independent on separated data") {
    // Scores differing by more than accumulated rounding keep their ranking.
    Rng rng(303);
    const size_t dim = 128;
    const size_t count = 50;
    std::vector<float> base;
    for (size_t i = 0; i < count; ++i) {
        auto row = random_vec(rng, dim);
        row[0] += static_cast<float>(i) * 0.5f;
        base.insert(base.end(), row.begin(), row.end());
    }
    std::vector<float> query(dim, 0.0f);
    query[0] = 1.0f;

    std::vector<float> fast(count);
    std::vector<float> reference(count);
    vecops::batch_dot(query.data(), base.data(), count, dim, fast.data());
    vecops::batch_dot_scalar(query.data(), base.data(), count, dim, reference.data());

    size_t argmax_fast = 0;
    size_t argmax_ref = 0;
    for (size_t i = 1; i < count; ++i) {
        if (fast[i] > fast[argmax_fast]) argmax_fast = i;
        if (reference[i] > reference[argmax_ref]) argmax_ref = i;
    }
    CHECK(argmax_fast == argmax_ref);
}
