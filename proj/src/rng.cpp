#include "idid/rng.hpp"

#include <cmath>

#include "idid/errors.hpp"

namespace idid {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t x = state;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Acklam's rational approximation to the normal quantile.
double inv_norm_cdf_approx(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865476); }

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError(ErrorKind::InvalidArgument, "inv_norm_cdf requires p in (0,1)");
  double x = inv_norm_cdf_approx(p);
  // one Halley step against the true CDF
  double e = norm_cdf(x) - p;
  double u = e / (kInvSqrt2Pi * std::exp(-0.5 * x * x));
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

RngStream::RngStream(std::uint64_t master_seed,
                     std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = master_seed;
  (void)splitmix64(state);
  for (std::uint64_t id : path) {
    state ^= splitmix64(state) + id;
  }
  std::uint64_t w0 = splitmix64(state);
  std::uint64_t w1 = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(w0), static_cast<std::uint32_t>(w0 >> 32),
                    static_cast<std::uint32_t>(w1), static_cast<std::uint32_t>(w1 >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  // 53-bit mantissa, shifted to the open interval
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() { return inv_norm_cdf(uniform()); }

bool RngStream::bernoulli(double p) { return uniform() < p; }

double RngStream::truncated_normal() {
  static const double lo = norm_cdf(-1.0);
  static const double hi = norm_cdf(1.0);
  return inv_norm_cdf(lo + uniform() * (hi - lo));
}

}  // namespace idid
