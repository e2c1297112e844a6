#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace drosc {

using Vector = std::vector<double>;

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Symmetric matrix; writes go through set() which mirrors both triangles.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    data_[i * n_ + j] = v;
    data_[j * n_ + i] = v;
  }
  void add(std::size_t i, std::size_t j, double v) { set(i, j, (*this)(i, j) + v); }

  std::size_t dim() const { return n_; }
  double max_abs() const;
  Vector mul(const Vector& x) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

// Counter-derived xoshiro256++ stream. Identical (seed, stream) reproduce the
// same draw sequence; distinct stream ids give independent-quality streams.
// Normal deviates use Box-Muller with the spare value cached per stream.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();  // in (0,1), 53-bit resolution
  double normal();

  // Derived stream for sub-task k; independent of call order across tasks.
  RngStream substream(std::uint64_t k) const;

  static std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t s_[4] = {0, 0, 0, 0};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Lower-triangular Cholesky factor of a PSD matrix. On failure the jitter added
// to the diagonal escalates x10, at most 3 escalations; throws NumericError
// carrying the last jitter tried. Zero pivots (semidefinite input) produce a
// zero column, so rank-deficient PSD matrices factor without jitter.
Matrix cholesky_psd(const SymMatrix& a, double jitter = 0.0);

// Smallest eigenvalue by cyclic Jacobi rotations (n <= 200).
double min_eigenvalue(const SymMatrix& a);

// Standard normal CDF and the upper-q quantile z_q with Phi(-z_q) = q.
double normal_cdf(double x);
double normal_quantile(double q);

// Quantile of the noncentral chi-square with 1 degree of freedom. CDF via the
// Poisson mixture of central chi-square CDFs, quantile by bisection.
double noncentral_chisq1_quantile(double level, double ncp);

// mean + L z with z i.i.d. standard normal from rng.
Vector sample_mvn(const Vector& mean, const Matrix& chol_lower, RngStream& rng);

// Forward substitution L z = b; zero diagonal entries map to z = 0 (used to
// whiten draws produced with a rank-deficient factor).
Vector solve_lower(const Matrix& chol_lower, const Vector& b);

// Dense LU solve with partial pivoting; returns false when singular.
bool solve_linear(Matrix a, Vector b, Vector& out);

}  // namespace drosc
