#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "msamil/error.hpp"

namespace msamil {

/// Two 3x3 same-padded convolutions (ReLU, 2x2 max-pool each) followed by a
/// single-logit dense layer. Pooling floors odd extents.
struct Architecture {
  int input_size = 50;
  int in_channels = 3;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int kernel = 3;

  int pool1_size() const noexcept { return input_size / 2; }
  int pool2_size() const noexcept { return pool1_size() / 2; }
  int dense_inputs() const noexcept { return conv2_channels * pool2_size() * pool2_size(); }

  std::size_t conv1_weights() const noexcept {
    return static_cast<std::size_t>(conv1_channels) * in_channels * kernel * kernel;
  }
  std::size_t conv2_weights() const noexcept {
    return static_cast<std::size_t>(conv2_channels) * conv1_channels * kernel * kernel;
  }

  // Flat layout: conv1 W, conv1 b, conv2 W, conv2 b, dense W, dense b.
  std::size_t off_b1() const noexcept { return conv1_weights(); }
  std::size_t off_w2() const noexcept { return off_b1() + conv1_channels; }
  std::size_t off_b2() const noexcept { return off_w2() + conv2_weights(); }
  std::size_t off_wd() const noexcept { return off_b2() + conv2_channels; }
  std::size_t off_bd() const noexcept { return off_wd() + dense_inputs(); }
  std::size_t parameter_count() const noexcept { return off_bd() + 1; }

  std::size_t input_length() const noexcept {
    return static_cast<std::size_t>(in_channels) * input_size * input_size;
  }

  void validate() const {
    if (input_size < 4 || in_channels < 1 || conv1_channels < 1 || conv2_channels < 1)
      fail(ErrorKind::ArchitectureMismatch, "architecture needs input_size >= 4 and positive channels");
    if (kernel != 3) fail(ErrorKind::ArchitectureMismatch, "only 3x3 kernels are supported");
  }

  friend bool operator==(const Architecture&, const Architecture&) = default;
};

namespace net_detail {

// out[o] = b[o] + sum_i W[o,i] * in[i], zero padding 1, all planes n x n.
template <typename T>
void conv_forward(const T* in, int cin, int n, const T* w, const T* b, int cout, T* out) {
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  for (int o = 0; o < cout; ++o) {
    T* dst = out + o * plane;
    std::fill(dst, dst + plane, b[o]);
    for (int i = 0; i < cin; ++i) {
      const T* src = in + i * plane;
      const T* k = w + (static_cast<std::size_t>(o) * cin + i) * 9;
      for (int kr = 0; kr < 3; ++kr)
        for (int kc = 0; kc < 3; ++kc) {
          const T wk = k[kr * 3 + kc];
          const int dr = kr - 1, dc = kc - 1;
          const int r0 = std::max(0, -dr), r1 = std::min(n, n - dr);
          const int c0 = std::max(0, -dc), c1 = std::min(n, n - dc);
          for (int r = r0; r < r1; ++r) {
            T* orow = dst + static_cast<std::size_t>(r) * n;
            const T* irow = src + static_cast<std::size_t>(r + dr) * n + dc;
            for (int c = c0; c < c1; ++c) orow[c] += wk * irow[c];
          }
        }
    }
  }
}

// Accumulates weight/bias gradients and, when din != nullptr, input gradients.
template <typename T>
void conv_backward(const T* in, int cin, int n, const T* w, const T* dout, int cout, T* dw,
                   T* db, T* din) {
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  for (int o = 0; o < cout; ++o) {
    const T* g = dout + o * plane;
    T bsum = 0;
    for (std::size_t p = 0; p < plane; ++p) bsum += g[p];
    db[o] += bsum;
    for (int i = 0; i < cin; ++i) {
      const T* src = in + i * plane;
      const std::size_t koff = (static_cast<std::size_t>(o) * cin + i) * 9;
      for (int kr = 0; kr < 3; ++kr)
        for (int kc = 0; kc < 3; ++kc) {
          const int dr = kr - 1, dc = kc - 1;
          const int r0 = std::max(0, -dr), r1 = std::min(n, n - dr);
          const int c0 = std::max(0, -dc), c1 = std::min(n, n - dc);
          T acc = 0;
          for (int r = r0; r < r1; ++r) {
            const T* grow = g + static_cast<std::size_t>(r) * n;
            const T* irow = src + static_cast<std::size_t>(r + dr) * n + dc;
            for (int c = c0; c < c1; ++c) acc += grow[c] * irow[c];
          }
          dw[koff + kr * 3 + kc] += acc;
          if (din) {
            const T wk = w[koff + kr * 3 + kc];
            T* dsrc = din + i * plane;
            for (int r = r0; r < r1; ++r) {
              const T* grow = g + static_cast<std::size_t>(r) * n;
              T* drow = dsrc + static_cast<std::size_t>(r + dr) * n + dc;
              for (int c = c0; c < c1; ++c) drow[c] += wk * grow[c];
            }
          }
        }
    }
  }
}

// In-place ReLU followed by 2x2/2 max-pool; records the winning flat index
// (first maximum in row-major window order).
template <typename T>
void relu_pool(T* act, int channels, int n, T* pooled, int* arg) {
  const int m = n / 2;
  const std::size_t plane = static_cast<std::size_t>(n) * n;
  const std::size_t total = plane * channels;
  for (std::size_t p = 0; p < total; ++p) act[p] = act[p] > T(0) ? act[p] : T(0);
  for (int ch = 0; ch < channels; ++ch) {
    const T* src = act + ch * plane;
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        int best = (2 * r) * n + 2 * c;
        const int cand[3] = {best + 1, best + n, best + n + 1};
        for (int k : cand)
          if (src[k] > src[best]) best = k;
        const std::size_t q = (static_cast<std::size_t>(ch) * m + r) * m + c;
        pooled[q] = src[best];
        arg[q] = static_cast<int>(ch * plane) + best;
      }
  }
}

}  // namespace net_detail

/// Per-sample activations and scratch for one forward/backward pass.
template <typename T>
struct Workspace {
  std::vector<T> a1, m1, a2, m2;
  std::vector<int> arg1, arg2;
  std::vector<T> da1, dm1, da2;

  explicit Workspace(const Architecture& arch) {
    const std::size_t s = arch.input_size, p1 = arch.pool1_size(), p2 = arch.pool2_size();
    a1.resize(arch.conv1_channels * s * s);
    m1.resize(arch.conv1_channels * p1 * p1);
    arg1.resize(m1.size());
    a2.resize(arch.conv2_channels * p1 * p1);
    m2.resize(arch.conv2_channels * p2 * p2);
    arg2.resize(m2.size());
    da1.resize(a1.size());
    dm1.resize(m1.size());
    da2.resize(a2.size());
  }
};

/// Logit for one input laid out channel-major (C x s x s).
template <typename T>
T forward_logit(const Architecture& arch, std::span<const T> params, std::span<const T> input,
                Workspace<T>& ws) {
  using namespace net_detail;
  const int s = arch.input_size, p1 = arch.pool1_size();
  const T* w = params.data();
  conv_forward(input.data(), arch.in_channels, s, w, w + arch.off_b1(), arch.conv1_channels,
               ws.a1.data());
  relu_pool(ws.a1.data(), arch.conv1_channels, s, ws.m1.data(), ws.arg1.data());
  conv_forward(ws.m1.data(), arch.conv1_channels, p1, w + arch.off_w2(), w + arch.off_b2(),
               arch.conv2_channels, ws.a2.data());
  relu_pool(ws.a2.data(), arch.conv2_channels, p1, ws.m2.data(), ws.arg2.data());
  const T* wd = w + arch.off_wd();
  T z = w[arch.off_bd()];
  for (std::size_t k = 0; k < ws.m2.size(); ++k) z += wd[k] * ws.m2[k];
  return z;
}

/// Backpropagates dL/dlogit through the activations left in ws by the
/// matching forward_logit call, accumulating into grad.
template <typename T>
void backward_logit(const Architecture& arch, std::span<const T> params, std::span<const T> input,
                    T dlogit, Workspace<T>& ws, std::span<T> grad) {
  using namespace net_detail;
  const int s = arch.input_size, p1 = arch.pool1_size();
  const T* w = params.data();
  T* g = grad.data();

  const T* wd = w + arch.off_wd();
  T* gwd = g + arch.off_wd();
  g[arch.off_bd()] += dlogit;
  std::fill(ws.da2.begin(), ws.da2.end(), T(0));
  for (std::size_t k = 0; k < ws.m2.size(); ++k) {
    gwd[k] += dlogit * ws.m2[k];
    // Pool winners with a zero activation were clipped by ReLU.
    if (ws.m2[k] > T(0)) ws.da2[ws.arg2[k]] += dlogit * wd[k];
  }

  std::fill(ws.dm1.begin(), ws.dm1.end(), T(0));
  conv_backward(ws.m1.data(), arch.conv1_channels, p1, w + arch.off_w2(), ws.da2.data(),
                arch.conv2_channels, g + arch.off_w2(), g + arch.off_b2(), ws.dm1.data());

  std::fill(ws.da1.begin(), ws.da1.end(), T(0));
  for (std::size_t k = 0; k < ws.m1.size(); ++k)
    if (ws.m1[k] > T(0)) ws.da1[ws.arg1[k]] += ws.dm1[k];

  conv_backward(input.data(), arch.in_channels, s, w, ws.da1.data(), arch.conv1_channels, g,
                g + arch.off_b1(), static_cast<T*>(nullptr));
}

template <typename T>
T sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

}  // namespace msamil
