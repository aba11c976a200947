#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace ucmar::detail {

// Small row-major GEMM kernels shaped for im2col convolutions. All three
// accumulate into C and use fused multiply-adds only (std::fma / hardware
// FMA), which pins rounding independently of -ffp-contract, so every code
// path routed through these kernels agrees bit for bit.
//
// Numeric contract:
//   nn, tn -- each C element is one fma fold in ascending reduction order,
//             bitwise identical to the naive scalar triple loop. The 4x16
//             register tiling (and the AVX2 microkernel) only reorders
//             independent elements, never the fold.
//   nt     -- reduces over the long dimension in 512-column slabs, eight
//             lanes per slab combined as ((l0+l1)+(l2+l3))+((l4+l5)+(l6+l7)),
//             then slabs added to C in ascending order.

inline constexpr int kRowTile = 4;   // C rows per microkernel
inline constexpr int kColTile = 16;  // C columns per microkernel (2 x 8 lanes)
inline constexpr int kSlab = 512;    // nt reduction slab (keeps rows cache-hot)

#if defined(__AVX2__) && defined(__FMA__)

// 4x16 microkernel: C[r, 0:16] = fold_fma over the reduction index of
// A[r] * B. A is addressed as A[r * stride_r + k * stride_k] so the same
// kernel serves nn (stride over rows) and tn (transposed access).
inline void micro_4x16_f(int K, const float* A, std::size_t stride_r, std::size_t stride_k,
                         const float* B, std::size_t ldb, float* C, std::size_t ldc) {
  __m256 c00 = _mm256_loadu_ps(C + 0 * ldc), c01 = _mm256_loadu_ps(C + 0 * ldc + 8);
  __m256 c10 = _mm256_loadu_ps(C + 1 * ldc), c11 = _mm256_loadu_ps(C + 1 * ldc + 8);
  __m256 c20 = _mm256_loadu_ps(C + 2 * ldc), c21 = _mm256_loadu_ps(C + 2 * ldc + 8);
  __m256 c30 = _mm256_loadu_ps(C + 3 * ldc), c31 = _mm256_loadu_ps(C + 3 * ldc + 8);
  for (int k = 0; k < K; ++k) {
    const __m256 b0 = _mm256_loadu_ps(B + k * ldb);
    const __m256 b1 = _mm256_loadu_ps(B + k * ldb + 8);
    __m256 a;
    a = _mm256_broadcast_ss(A + 0 * stride_r + k * stride_k);
    c00 = _mm256_fmadd_ps(a, b0, c00);
    c01 = _mm256_fmadd_ps(a, b1, c01);
    a = _mm256_broadcast_ss(A + 1 * stride_r + k * stride_k);
    c10 = _mm256_fmadd_ps(a, b0, c10);
    c11 = _mm256_fmadd_ps(a, b1, c11);
    a = _mm256_broadcast_ss(A + 2 * stride_r + k * stride_k);
    c20 = _mm256_fmadd_ps(a, b0, c20);
    c21 = _mm256_fmadd_ps(a, b1, c21);
    a = _mm256_broadcast_ss(A + 3 * stride_r + k * stride_k);
    c30 = _mm256_fmadd_ps(a, b0, c30);
    c31 = _mm256_fmadd_ps(a, b1, c31);
  }
  _mm256_storeu_ps(C + 0 * ldc, c00);
  _mm256_storeu_ps(C + 0 * ldc + 8, c01);
  _mm256_storeu_ps(C + 1 * ldc, c10);
  _mm256_storeu_ps(C + 1 * ldc + 8, c11);
  _mm256_storeu_ps(C + 2 * ldc, c20);
  _mm256_storeu_ps(C + 2 * ldc + 8, c21);
  _mm256_storeu_ps(C + 3 * ldc, c30);
  _mm256_storeu_ps(C + 3 * ldc + 8, c31);
}

#endif  // __AVX2__ && __FMA__

// Scalar 1-row x 16-column tile with the same per-element fold order as the
// microkernel; used for leftover rows and the non-AVX2 build.
template <typename S>
void row_16(int K, const S* A, std::size_t stride_k, const S* B, std::size_t ldb, S* c) {
  S acc[kColTile];
  for (int j = 0; j < kColTile; ++j) acc[j] = c[j];
  for (int k = 0; k < K; ++k) {
    const S a = A[k * stride_k];
    const S* b = B + k * ldb;
    for (int j = 0; j < kColTile; ++j) acc[j] = std::fma(a, b[j], acc[j]);
  }
  for (int j = 0; j < kColTile; ++j) c[j] = acc[j];
}

// Shared skeleton for nn and tn: C is rows x N, A addressed via the two
// strides, reduction length K.
template <typename S>
void tiled_nn(int rows, int N, int K, const S* A, std::size_t stride_r, std::size_t stride_k,
              const S* B, std::size_t ldb, S* C, std::size_t ldc) {
  for (int n0 = 0; n0 + kColTile <= N; n0 += kColTile) {
    int r0 = 0;
#if defined(__AVX2__) && defined(__FMA__)
    if constexpr (std::is_same_v<S, float>) {
      for (; r0 + kRowTile <= rows; r0 += kRowTile)
        micro_4x16_f(K, A + r0 * stride_r, stride_r, stride_k, B + n0, ldb, C + r0 * ldc + n0,
                     ldc);
    }
#endif
    for (; r0 + kRowTile <= rows; r0 += kRowTile) {
      S acc[kRowTile][kColTile];
      for (int r = 0; r < kRowTile; ++r)
        for (int j = 0; j < kColTile; ++j) acc[r][j] = C[(r0 + r) * ldc + n0 + j];
      for (int k = 0; k < K; ++k) {
        const S* b = B + k * ldb + n0;
        for (int r = 0; r < kRowTile; ++r) {
          const S a = A[(r0 + r) * stride_r + k * stride_k];
          for (int j = 0; j < kColTile; ++j) acc[r][j] = std::fma(a, b[j], acc[r][j]);
        }
      }
      for (int r = 0; r < kRowTile; ++r)
        for (int j = 0; j < kColTile; ++j) C[(r0 + r) * ldc + n0 + j] = acc[r][j];
    }
    for (; r0 < rows; ++r0)
      row_16(K, A + r0 * stride_r, stride_k, B + n0, ldb, C + r0 * ldc + n0);
  }
  const int n_tail = N - N % kColTile;
  if (n_tail < N) {
    for (int r = 0; r < rows; ++r)
      for (int n = n_tail; n < N; ++n) {
        S acc = C[r * ldc + n];
        for (int k = 0; k < K; ++k)
          acc = std::fma(A[r * stride_r + k * stride_k], B[k * ldb + n], acc);
        C[r * ldc + n] = acc;
      }
  }
}

/// C[M x N] += A[M x K] * B[K x N]
template <typename S>
void gemm_nn(int M, int N, int K, const S* A, const S* B, S* C) {
  tiled_nn<S>(M, N, K, A, /*stride_r=*/K, /*stride_k=*/1, B, N, C, N);
}

/// C[K x N] += A[M x K]^T * B[M x N]
template <typename S>
void gemm_tn(int M, int N, int K, const S* A, const S* B, S* C) {
  tiled_nn<S>(K, N, M, A, /*stride_r=*/1, /*stride_k=*/K, B, N, C, N);
}

/// C[M x K] += A[M x N] * B[K x N]^T
template <typename S>
void gemm_nt(int M, int N, int K, const S* A, const S* B, S* C) {
  const std::size_t lda = N, ldb = N, ldc = K;
  for (int n0 = 0; n0 < N; n0 += kSlab) {
    const int n1 = n0 + kSlab < N ? n0 + kSlab : N;
    int m0 = 0;
    for (; m0 + 2 <= M; m0 += 2) {
      const S* a0 = A + m0 * lda;
      const S* a1 = a0 + lda;
      int k0 = 0;
      for (; k0 + 4 <= K; k0 += 4) {
        const S* b0 = B + k0 * ldb;
        const S* b1 = b0 + ldb;
        const S* b2 = b1 + ldb;
        const S* b3 = b2 + ldb;
        const S* rows[2] = {a0, a1};
        const S* cols[4] = {b0, b1, b2, b3};
        int n = n0;
#if defined(__AVX2__) && defined(__FMA__)
        if constexpr (std::is_same_v<S, float>) {
          __m256 v[8] = {_mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(),
                         _mm256_setzero_ps(), _mm256_setzero_ps(), _mm256_setzero_ps(),
                         _mm256_setzero_ps(), _mm256_setzero_ps()};
          for (; n + 8 <= n1; n += 8) {
            const __m256 va0 = _mm256_loadu_ps(a0 + n);
            const __m256 va1 = _mm256_loadu_ps(a1 + n);
            v[0] = _mm256_fmadd_ps(va0, _mm256_loadu_ps(b0 + n), v[0]);
            v[1] = _mm256_fmadd_ps(va0, _mm256_loadu_ps(b1 + n), v[1]);
            v[2] = _mm256_fmadd_ps(va0, _mm256_loadu_ps(b2 + n), v[2]);
            v[3] = _mm256_fmadd_ps(va0, _mm256_loadu_ps(b3 + n), v[3]);
            v[4] = _mm256_fmadd_ps(va1, _mm256_loadu_ps(b0 + n), v[4]);
            v[5] = _mm256_fmadd_ps(va1, _mm256_loadu_ps(b1 + n), v[5]);
            v[6] = _mm256_fmadd_ps(va1, _mm256_loadu_ps(b2 + n), v[6]);
            v[7] = _mm256_fmadd_ps(va1, _mm256_loadu_ps(b3 + n), v[7]);
          }
          for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 4; ++c) {
              alignas(32) float l[8];
              _mm256_store_ps(l, v[r * 4 + c]);
              S s = ((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]));
              for (int t = n; t < n1; ++t) s = std::fma(rows[r][t], cols[c][t], s);
              C[(m0 + r) * ldc + k0 + c] += s;
            }
          continue;
        }
#endif
        S lane[8][8] = {};
        for (; n + 8 <= n1; n += 8)
          for (int j = 0; j < 8; ++j) {
            lane[0][j] = std::fma(a0[n + j], b0[n + j], lane[0][j]);
            lane[1][j] = std::fma(a0[n + j], b1[n + j], lane[1][j]);
            lane[2][j] = std::fma(a0[n + j], b2[n + j], lane[2][j]);
            lane[3][j] = std::fma(a0[n + j], b3[n + j], lane[3][j]);
            lane[4][j] = std::fma(a1[n + j], b0[n + j], lane[4][j]);
            lane[5][j] = std::fma(a1[n + j], b1[n + j], lane[5][j]);
            lane[6][j] = std::fma(a1[n + j], b2[n + j], lane[6][j]);
            lane[7][j] = std::fma(a1[n + j], b3[n + j], lane[7][j]);
          }
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 4; ++c) {
            S* l = lane[r * 4 + c];
            S s = ((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]));
            for (int t = n; t < n1; ++t) s = std::fma(rows[r][t], cols[c][t], s);
            C[(m0 + r) * ldc + k0 + c] += s;
          }
      }
      for (; k0 < K; ++k0) {
        const S* b = B + k0 * ldb;
        for (int r = 0; r < 2; ++r) {
          const S* a = r == 0 ? a0 : a1;
          S l[8] = {};
          int n = n0;
          for (; n + 8 <= n1; n += 8)
            for (int j = 0; j < 8; ++j) l[j] = std::fma(a[n + j], b[n + j], l[j]);
          S s = ((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]));
          for (; n < n1; ++n) s = std::fma(a[n], b[n], s);
          C[(m0 + r) * ldc + k0] += s;
        }
      }
    }
    for (; m0 < M; ++m0) {
      const S* a = A + m0 * lda;
      for (int k = 0; k < K; ++k) {
        const S* b = B + k * ldb;
        S l[8] = {};
        int n = n0;
        for (; n + 8 <= n1; n += 8)
          for (int j = 0; j < 8; ++j) l[j] = std::fma(a[n + j], b[n + j], l[j]);
        S s = ((l[0] + l[1]) + (l[2] + l[3])) + ((l[4] + l[5]) + (l[6] + l[7]));
        for (; n < n1; ++n) s = std::fma(a[n], b[n], s);
        C[m0 * ldc + k] += s;
      }
    }
  }
}

}  // namespace ucmar::detail
