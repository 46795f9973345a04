#pragma once

#include "lsfem/core.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace lsfem {

inline int& thread_setting() {
  static int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

inline int num_threads() { return thread_setting(); }

inline void set_num_threads(int n) {
  if (n < 1) throw ConfigError("thread count must be positive");
  thread_setting() = n;
}

/// Calls f(begin, end, chunk) on contiguous chunks of [0, n), one chunk per thread.
template <class F>
void parallel_chunks(int n, F&& f) {
  const int t = std::max(1, std::min(num_threads(), n));
  if (t == 1) {
    f(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(t);
  for (int c = 0; c < t; ++c) {
    const int b = static_cast<int>(static_cast<long long>(n) * c / t);
    const int e = static_cast<int>(static_cast<long long>(n) * (c + 1) / t);
    pool.emplace_back([&, b, e, c] {
      try {
        f(b, e, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

/// Builds a sparse matrix from per-item triplet contributions. Items are processed in
/// fixed batches and each batch's triplets are concatenated in item order, so the
/// result does not depend on the thread count and peak memory stays bounded.
template <class F>
SparseMatrix assemble_sparse(int rows, int cols, int items, F&& f, int batch = 16384) {
  SparseMatrix total(rows, cols);
  std::vector<Triplet> all;
  for (int b0 = 0; b0 < items; b0 += batch) {
    const int nb = std::min(batch, items - b0);
    const int t = std::max(1, std::min(num_threads(), nb));
    std::vector<std::vector<Triplet>> parts(t);
    parallel_chunks(nb, [&](int b, int e, int c) {
      for (int i = b; i < e; ++i) f(b0 + i, parts[c]);
    });
    all.clear();
    for (auto& p : parts) {
      all.insert(all.end(), p.begin(), p.end());
      std::vector<Triplet>().swap(p);
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(all.begin(), all.end());
    if (b0 == 0) {
      total = std::move(m);
    } else {
      total += m;
    }
  }
  total.makeCompressed();
  return total;
}

/// Sums per-item (index, value) contributions into a vector, in item order.
template <class F>
Vector assemble_vector(int n, int items, F&& f) {
  const int t = std::max(1, std::min(num_threads(), items));
  std::vector<std::vector<std::pair<int, double>>> parts(t);
  parallel_chunks(items, [&](int b, int e, int c) {
    for (int i = b; i < e; ++i) f(i, parts[c]);
  });
  Vector v = Vector::Zero(n);
  for (const auto& p : parts) {
    for (const auto& [i, x] : p) v[i] += x;
  }
  return v;
}

}  // namespace lsfem
