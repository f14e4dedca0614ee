#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace fmo {

// Raster convention used throughout: pixel (x,y) is sampled at integer
// coordinates and covers the unit square [x-0.5,x+0.5] x [y-0.5,y+0.5].
// Sub-pixel geometry (trajectories, polygons) lives in the same coordinate
// frame.

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) {
    double n = norm(a);
    return n > 0 ? a * (1.0 / n) : Vec3{0, 0, 1};
}

// RGB triple, channels nominally in [0,1].
struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;

    Rgb operator+(Rgb o) const { return {r + o.r, g + o.g, b + o.b}; }
    Rgb operator-(Rgb o) const { return {r - o.r, g - o.g, b - o.b}; }
    Rgb operator*(double s) const { return {r * s, g * s, b * s}; }
    Rgb& operator+=(Rgb o) { r += o.r; g += o.g; b += o.b; return *this; }
};

inline double norm(Rgb a) { return std::sqrt(a.r * a.r + a.g * a.g + a.b * a.b); }
inline Rgb clamp01(Rgb a) {
    return {std::clamp(a.r, 0.0, 1.0), std::clamp(a.g, 0.0, 1.0), std::clamp(a.b, 0.0, 1.0)};
}

// Integer raster coordinate.
struct Pixel {
    int x = 0;
    int y = 0;

    bool operator==(const Pixel&) const = default;
};

// Half-open integer rectangle [x0,x1) x [y0,y1).
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }

    Rect grown(int m) const { return {x0 - m, y0 - m, x1 + m, y1 + m}; }
    Rect clipped(const Rect& o) const {
        return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
    }
    static Rect hull(const Rect& a, const Rect& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        return {std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1), std::max(a.y1, b.y1)};
    }
};

// Euclidean distance from point p to the segment [a,b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = dot(ab, ab);
    if (len2 <= 0.0) return distance(p, a);
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

// 3x3 rotation matrix, row major.
struct Mat3 {
    double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

    Vec3 apply(Vec3 v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transposed() const {
        Mat3 t;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t.m[r * 3 + c] = m[c * 3 + r];
        return t;
    }
};

// Rodrigues rotation about a unit axis.
inline Mat3 rotation_about_axis(Vec3 axis, double angle) {
    Vec3 u = normalized(axis);
    double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    Mat3 r;
    r.m[0] = c + u.x * u.x * t;
    r.m[1] = u.x * u.y * t - u.z * s;
    r.m[2] = u.x * u.z * t + u.y * s;
    r.m[3] = u.y * u.x * t + u.z * s;
    r.m[4] = c + u.y * u.y * t;
    r.m[5] = u.y * u.z * t - u.x * s;
    r.m[6] = u.z * u.x * t - u.y * s;
    r.m[7] = u.z * u.y * t + u.x * s;
    r.m[8] = c + u.z * u.z * t;
    return r;
}

}  // namespace fmo
