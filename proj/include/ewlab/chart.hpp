#ifndef EWLAB_CHART_HPP
#define EWLAB_CHART_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ewlab {

using Vec3 = std::array<double, 3>;

struct SingularLocus {
  std::string desc;
  // signed distance-like function; samples must keep |f| >= margin
  std::function<double(const Vec3&)> f;
};

struct Chart {
  std::string name;
  std::array<std::string, 3> coords;
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};
  double singular_margin = 0.05;
  std::vector<SingularLocus> loci;
  int orientation = +1;

  int coord_index(const std::string& c) const {
    for (int i = 0; i < 3; ++i)
      if (coords[static_cast<std::size_t>(i)] == c) return i;
    return -1;
  }
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool in_box(const Chart& ch, const Vec3& p, double shrink = 0.0) {
  for (int i = 0; i < 3; ++i)
    if (p[i] < ch.lo[i] + shrink || p[i] > ch.hi[i] - shrink) return false;
  return true;
}

inline bool margin_safe(const Chart& ch, const Vec3& p) {
  if (!in_box(ch, p)) return false;
  for (const auto& l : ch.loci)
    if (std::fabs(l.f(p)) < ch.singular_margin) return false;
  return true;
}

inline void require_margin_safe(const Chart& ch, const Vec3& p) {
  if (!in_box(ch, p))
    throw DomainError("point outside domain box of chart '" + ch.name + "'");
  for (const auto& l : ch.loci)
    if (std::fabs(l.f(p)) < ch.singular_margin)
      throw DomainError("point within singular margin of " + l.desc +
                        " on chart '" + ch.name + "'");
}

namespace detail {

// splitmix64: documented, platform-independent seeding/expansion
class Rng64 {
 public:
  explicit Rng64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace detail

// Uniform samples over the margin-shrunk box, rejecting points near singular
// loci.  Deterministic: same seed, same sequence, on every platform.
inline std::vector<Vec3> sample_probes(const Chart& ch, int n,
                                       std::uint64_t seed,
                                       double extra_shrink = 0.0) {
  detail::Rng64 rng(seed);
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(n));
  const double shrink = ch.singular_margin + extra_shrink;
  int guard = 0;
  while (static_cast<int>(out.size()) < n) {
    if (++guard > 100000 * (n + 1))
      throw DomainError("probe sampling failed: domain too constrained");
    Vec3 p;
    for (int i = 0; i < 3; ++i) {
      const double a = ch.lo[i] + shrink, b = ch.hi[i] - shrink;
      if (!(b > a)) throw DomainError("empty margin-shrunk domain");
      p[i] = a + (b - a) * rng.uniform01();
    }
    if (margin_safe(ch, p)) out.push_back(p);
  }
  return out;
}

// ------------------------------------------------------------------
// Stock charts

inline Chart cartesian_chart(double lo = -1.0, double hi = 1.0) {
  Chart ch;
  ch.name = "cartesian";
  ch.coords = {"x", "y", "z"};
  ch.lo = {lo, lo, lo};
  ch.hi = {hi, hi, hi};
  return ch;
}

inline Chart cartesian_chart(Vec3 lo, Vec3 hi) {
  Chart ch = cartesian_chart();
  ch.lo = lo;
  ch.hi = hi;
  return ch;
}

// (rho, eta, psi) half-space chart with the rho = 0 axis excluded
inline Chart halfspace_chart(double rho_lo = 0.35, double rho_hi = 1.8,
                             double eta_lo = 0.3, double eta_hi = 1.6) {
  Chart ch;
  ch.name = "halfspace";
  ch.coords = {"rho", "eta", "psi"};
  ch.lo = {rho_lo, eta_lo, 0.0};
  ch.hi = {rho_hi, eta_hi, 1.0};
  ch.loci.push_back({"rho=0", [](const Vec3& p) { return p[0]; }});
  return ch;
}

}  // namespace ewlab

#endif
