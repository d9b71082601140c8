#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sokl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Thrown on contract violations (bad arguments, malformed inputs).
/// The CLI maps this to exit code 2.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

inline bool all_finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) return false;
  }
  return true;
}

inline bool all_finite(const std::vector<double>& v) { return all_finite(v.data(), v.size()); }

inline void require_finite(const std::vector<double>& v, const std::string& what) {
  require(all_finite(v), what + ": non-finite sample");
}

/// Dense samples on a (x, angle) product grid, row-major with the angle
/// index fastest. For 2-D space the x index is flattened as ix = i0*n1 + i1.
struct Field2 {
  int nx = 0;
  int na = 0;
  std::vector<double> v;

  Field2() = default;
  Field2(int nx_, int na_, double fill = 0.0)
      : nx(nx_), na(na_), v(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(na_), fill) {}

  double& at(int ix, int ia) { return v[static_cast<std::size_t>(ix) * na + ia]; }
  double at(int ix, int ia) const { return v[static_cast<std::size_t>(ix) * na + ia]; }
  double* row(int ix) { return v.data() + static_cast<std::size_t>(ix) * na; }
  const double* row(int ix) const { return v.data() + static_cast<std::size_t>(ix) * na; }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Field2& o) const { return nx == o.nx && na == o.na; }
};

inline double sqr(double x) { return x * x; }

}  // namespace sokl
