#pragma once

// Shared primitives: closed intervals, 2D/3D vectors, deterministic RNG,
// seed derivation, and locale-independent number formatting.  Everything in
// here is reproducible bit-for-bit across runs on the same platform; no
// std::uniform_* distributions are used because their output sequences are
// implementation-defined.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace scenforge {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Row-major 3x3 matrix; just enough linear algebra for camera extrinsics.
struct Mat3 {
  std::array<double, 9> m{};  // m[3*row + col]
  static Mat3 identity() {
    Mat3 r;
    r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return r;
  }
  double operator()(int r, int c) const { return m[3 * r + c]; }
  double& operator()(int r, int c) { return m[3 * r + c]; }
  friend bool operator==(const Mat3&, const Mat3&) = default;
};

inline Vec3 mul(const Mat3& a, Vec3 v) {
  return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
          a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
          a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      r(i, j) = s;
    }
  return r;
}

inline Mat3 transpose(const Mat3& a) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = a(j, i);
  return r;
}

// Closed interval [lo, hi].  Degenerate (lo == hi) is allowed; lo > hi is a
// construction error the caller must avoid (asserted in debug builds).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Affine map of u in [0,1] onto [r.lo, r.hi]: u=0 -> lo, u=1 -> hi.
// Degenerate intervals return lo for every u.
inline double rand_in(double u, const Interval& r) {
  return r.lo + u * (r.hi - r.lo);
}

inline double clamp(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

inline double clamp(double v, const Interval& r) { return clamp(v, r.lo, r.hi); }

// FNV-1a over a byte string; used for stable, platform-independent seed
// derivation from (base seed, textual tag, salt).
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ull);

// splitmix64 finalizer; decorrelates structurally similar inputs.
std::uint64_t mix64(std::uint64_t x);

// Stable sub-stream seed: same inputs give the same output on every platform.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t salt = 0);

// Deterministic random source.  The raw generator is std::mt19937_64, whose
// output sequence is fixed by the standard; uniform and normal variates are
// derived with explicit arithmetic so that no implementation-defined
// distribution code is involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1): 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(const Interval& r) { return rand_in(uniform01(), r); }
  double uniform(double lo, double hi) { return rand_in(uniform01(), {lo, hi}); }

  // Uniform integer on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1u;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Standard normal via Box-Muller; consumes exactly two raw draws.
  double normal() {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;          // [0,1)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  bool coin() { return (next_u64() & 1u) != 0u; }

 private:
  std::mt19937_64 gen_;
};

// Shortest decimal representation that round-trips to the same double;
// locale independent and identical across runs.  NaN/inf are spelled
// "nan"/"inf"/"-inf".
std::string format_double(double v);

// Fixed-precision decimal (for places where column alignment matters more
// than shortness, e.g. SVG coordinates).
std::string format_fixed(double v, int digits);

enum class AgentCategory { kVehicle, kPedestrian };

std::string_view to_string(AgentCategory c);
AgentCategory agent_category_from_string(std::string_view s);  // throws std::invalid_argument

// Writes to `path + ".tmp"` then renames, so readers never observe a
// partially written artifact.  Throws std::runtime_error on I/O failure.
void write_file_atomic(const std::string& path, std::string_view bytes);

// Whole-file read; throws std::runtime_error when the file cannot be opened.
std::string read_file(const std::string& path);

}  // namespace scenforge
