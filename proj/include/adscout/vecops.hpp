#pragma once

#include <cstddef>
#include <string>

namespace adscout::vecops {

// Dense float kernels behind the embedding store. A scalar reference
// implementation always exists; AVX2 (x86-64) and NEON (aarch64) variants
// are selected once at runtime and are equivalence-tested against the
// reference in tests/test_vecops.cpp.

enum class KernelKind { Scalar, Avx2, Neon };

KernelKind active_kernel();
std::string kernel_name();

// Reference kernels. Plain loops, no reassociation tricks; oracles in the
// test suite call these directly.
float dot_scalar(const float* a, const float* b, size_t n);
void batch_dot_scalar(const float* query, const float* base, size_t count, size_t dim, float* out);

// Dispatched kernels.
float dot(const float* a, const float* b, size_t n);
void batch_dot(const float* query, const float* base, size_t count, size_t dim, float* out);

} // namespace adscout::vecops
