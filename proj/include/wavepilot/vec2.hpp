#pragma once

#include <cmath>

namespace wavepilot {

// Point or vector in the (x, z) propagation plane.
struct Vec2 {
    double x{0.0};
    double z{0.0};

    constexpr Vec2& operator+=(const Vec2& o) noexcept { x += o.x; z += o.z; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) noexcept { x -= o.x; z -= o.z; return *this; }
    constexpr Vec2& operator*=(double s) noexcept { x *= s; z *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
    friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.z}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.z * b.z; }
inline double norm(const Vec2& a) noexcept { return std::hypot(a.x, a.z); }
constexpr double norm_sq(const Vec2& a) noexcept { return dot(a, a); }

}  // namespace wavepilot
