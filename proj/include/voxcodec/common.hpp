// Copyright 2026 The voxcodec Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace voxcodec {

/// Coarse failure classes. The CLI prints the category name as the first
/// token of its single-line error message.
enum class ErrorCategory {
  kUsage,
  kConfig,
  kDomain,
  kFormat,
  kIo,
  kDiverged,
  kConsistency,
};

inline std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kDomain: return "domain";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kDiverged: return "diverged";
    case ErrorCategory::kConsistency: return "consistency";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

inline void check(bool cond, ErrorCategory category, const std::string& what) {
  if (!cond) throw Error(category, what);
}

template <typename T>
struct Vec3 {
  T x{}, y{}, z{};

  constexpr T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, T s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Vec3 operator*(T s, Vec3 a) { return a * s; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  template <typename U>
  constexpr Vec3<U> cast() const {
    return {static_cast<U>(x), static_cast<U>(y), static_cast<U>(z)};
  }
};

template <typename T>
constexpr T dot(Vec3<T> a, Vec3<T> b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T>
inline T norm(Vec3<T> a) {
  return std::sqrt(dot(a, a));
}

template <typename T>
inline Vec3<T> normalized(Vec3<T> a) {
  const T n = norm(a);
  return {a.x / n, a.y / n, a.z / n};
}

template <typename T>
constexpr Vec3<T> cross(Vec3<T> a, Vec3<T> b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;

/// Axis-aligned world box. Stored in double; samplers cast as needed.
struct Aabb {
  Vec3d lo{-1.0, -1.0, -1.0};
  Vec3d hi{1.0, 1.0, 1.0};

  Vec3d size() const { return hi - lo; }
  double diagonal() const { return norm(size()); }

  template <typename T>
  bool contains(const Vec3<T>& p) const {
    for (int a = 0; a < 3; ++a) {
      const double v = static_cast<double>(p[a]);
      if (!(v >= lo[a] && v <= hi[a])) return false;
    }
    return true;
  }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

/// Voxel counts per axis.
struct Dims {
  int x = 1, y = 1, z = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y) *
           static_cast<std::size_t>(z);
  }
  int operator[](int a) const { return a == 0 ? x : (a == 1 ? y : z); }
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline Dims cube(int n) { return {n, n, n}; }

}  // namespace voxcodec
