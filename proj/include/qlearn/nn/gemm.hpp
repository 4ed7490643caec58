#pragma once

#include <cstddef>
#include <vector>

// Row-major matrix products used by the linear and convolution layers.
// Inner loops run over contiguous memory so the compiler can vectorize
// them; summation order is fixed, which keeps results reproducible.

namespace qlearn::nn::blas {

/// C[m,n] (+)= A[m,k] * B[k,n]
template <typename T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
    if (!accumulate)
        for (std::size_t i = 0; i < m * n; ++i) c[i] = T{0};
    for (std::size_t i = 0; i < m; ++i) {
        T* crow = c + i * n;
        const T* arow = a + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T{0}) continue;
            const T* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

/// C[m,n] (+)= A[k,m]^T * B[k,n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate) {
    if (!accumulate)
        for (std::size_t i = 0; i < m * n; ++i) c[i] = T{0};
    for (std::size_t p = 0; p < k; ++p) {
        const T* arow = a + p * m;
        const T* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            const T av = arow[i];
            if (av == T{0}) continue;
            T* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

/// C[m,n] (+)= A[m,k] * B[n,k]^T. B is transposed into `scratch` first.
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c, bool accumulate,
             std::vector<T>& scratch) {
    scratch.resize(k * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t p = 0; p < k; ++p) scratch[p * n + j] = b[j * k + p];
    gemm_nn(m, n, k, a, scratch.data(), c, accumulate);
}

}  // namespace qlearn::nn::blas
