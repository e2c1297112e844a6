#include "drosc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drosc/errors.hpp"

namespace drosc {

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::fabs(v));
  return m;
}

Vector SymMatrix::mul(const Vector& x) const {
  Vector out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += data_[i * n_ + j] * x[j];
    out[i] = acc;
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t RngStream::mix64(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (0x9E3779B97F4A7C15ull + (b << 6) + (b >> 2));
  std::uint64_t s = x;
  std::uint64_t h = splitmix64(s);
  s ^= b;
  return h ^ splitmix64(s);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::uint64_t x = mix64(seed, stream);
  for (auto& w : s_) w = splitmix64(x);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() {
  // 53 random bits into (0,1); never returns 0 or 1 exactly.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

RngStream RngStream::substream(std::uint64_t k) const {
  return RngStream(seed_, mix64(stream_ + 0x632BE59BD9B4E019ull, k));
}

Matrix cholesky_psd(const SymMatrix& a, double jitter) {
  const std::size_t n = a.dim();
  const double scale = std::max(1.0, a.max_abs());
  const double zero_tol = 1e-12 * scale;
  double j_try = jitter;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Matrix l(n, n, 0.0);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      double d = a(j, j) + j_try;
      for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
      if (d < -zero_tol) {
        ok = false;
        break;
      }
      if (d <= zero_tol) {
        l(j, j) = 0.0;  // semidefinite pivot: zero column
        continue;
      }
      l(j, j) = std::sqrt(d);
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
        l(i, j) = s / l(j, j);
      }
    }
    if (ok) return l;
    j_try = (j_try > 0.0) ? j_try * 10.0 : 1e-12 * scale;
  }
  throw NumericError("cholesky_psd: not factorizable, last jitter " + std::to_string(j_try));
}

double min_eigenvalue(const SymMatrix& a) {
  const std::size_t n = a.dim();
  if (n == 0) return 0.0;
  if (n == 1) return a(0, 0);
  if (n > 200) throw NumericError("min_eigenvalue: dimension > 200");
  std::vector<double> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j);
  const double scale = std::max(1.0, a.max_abs());
  const double tol = 1e-14 * scale;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::fabs(m[p * n + q]));
    if (off <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m[p * n + q];
        if (std::fabs(apq) <= tol * 1e-2) continue;
        const double app = m[p * n + p];
        const double aqq = m[q * n + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = m[k * n + p];
          const double akq = m[k * n + q];
          m[k * n + p] = c * akp - s * akq;
          m[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = m[p * n + k];
          const double aqk = m[q * n + k];
          m[p * n + k] = c * apk - s * aqk;
          m[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  double mn = m[0];
  for (std::size_t i = 1; i < n; ++i) mn = std::min(mn, m[i * n + i]);
  return mn;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double normal_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw NumericError("normal_quantile: q outside (0,1)");
  // Acklam rational approximation for Phi^{-1}(p) with p = 1 - q, then Newton.
  const double p = 1.0 - q;
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
  double x;
  if (p < plow) {
    const double u = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  } else if (p <= 1.0 - plow) {
    const double u = p - 0.5;
    const double r = u * u;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double u = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
        ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
  }
  // Newton refinement on f(z) = Phi(-z) - q.
  for (int it = 0; it < 2; ++it) {
    const double f = normal_cdf(-x) - q;
    const double pdf = 0.3989422804014326779 * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x += f / pdf;
  }
  return x;
}

namespace {

// Regularized lower incomplete gamma P(a, x) via series / continued fraction.
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a;
  double c = 1e308;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::fabs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

double noncentral_chisq1_cdf(double x, double ncp) {
  if (x <= 0.0) return 0.0;
  const double h = ncp / 2.0;
  if (h == 0.0) return gamma_p(0.5, x / 2.0);
  // Poisson(h)-weighted mixture over central chi-square with 1+2k dof,
  // truncated when the remaining Poisson tail drops below 1e-14.
  double w = std::exp(-h);
  double cum_w = w;
  double acc = w * gamma_p(0.5, x / 2.0);
  for (int k = 1; k < 10000; ++k) {
    w *= h / k;
    cum_w += w;
    acc += w * gamma_p(0.5 + k, x / 2.0);
    if (1.0 - cum_w < 1e-14) break;
  }
  return acc;
}

}  // namespace

double noncentral_chisq1_quantile(double level, double ncp) {
  if (!(level > 0.0 && level < 1.0))
    throw NumericError("noncentral_chisq1_quantile: level outside (0,1)");
  double hi = 2.0 + ncp;
  while (noncentral_chisq1_cdf(hi, ncp) < level) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (noncentral_chisq1_cdf(mid, ncp) < level)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

Vector sample_mvn(const Vector& mean, const Matrix& chol_lower, RngStream& rng) {
  const std::size_t n = mean.size();
  Vector z(n);
  for (auto& v : z) v = rng.normal();
  Vector out(mean);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += chol_lower(i, j) * z[j];
    out[i] += acc;
  }
  return out;
}

Vector solve_lower(const Matrix& chol_lower, const Vector& b) {
  const std::size_t n = b.size();
  Vector z(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= chol_lower(i, j) * z[j];
    z[i] = (chol_lower(i, i) != 0.0) ? s / chol_lower(i, i) : 0.0;
  }
  return z;
}

bool solve_linear(Matrix a, Vector b, Vector& out) {
  const std::size_t n = b.size();
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::fabs(a(i, k)) > std::fabs(a(p, k))) p = i;
    if (std::fabs(a(p, k)) < 1e-300) return false;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * out[j];
    out[ii] = s / a(ii, ii);
  }
  return true;
}

}  // namespace drosc
