// Complex linear algebra primitives and seeded random sampling shared by the
// physics modules. Deliberately minimal: row-major dense storage, no views.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace leomfris::numerics {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// Dense complex matrix, row-major. Row-major indexing is part of the on-disk
// and cross-module contract (Kronecker reshapes, golden files), do not change.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  std::vector<Complex>& data() { return a_; }
  const std::vector<Complex>& data() const { return a_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> a_;
};

// Deterministic random stream. mt19937_64 output is fully specified by the
// standard and the gaussian transform below is built from explicit arithmetic,
// so a given seed yields the same sequence on every platform. One SeededRng is
// owned by exactly one logical execution stream.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();
  double uniform();   // [0, 1)
  double gaussian();  // standard normal, Box-Muller
  std::uint64_t seed() const { return seed_; }

  // Independent child stream; deterministic in (seed, stream id).
  SeededRng substream(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Stateless 64-bit mixer used to derive child seeds.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

// Kronecker product: result[i*b.size()+j] = a[i]*b[j].
CVector kron(const CVector& a, const CVector& b);

// Conjugate transpose.
CMatrix hermitian(const CMatrix& a);

// Squared Frobenius norm (sum of |a_ij|^2).
double frob_norm_sq(const CMatrix& a);

// Squared Euclidean norm of a vector.
double norm_sq(const CVector& v);

// Unconjugated dot product sum_i a_i*b_i. Callers pass row vectors that are
// already conjugated where the physics requires it.
Complex dot(const CVector& a, const CVector& b);

// y = A*x.
CVector matvec(const CMatrix& a, const CVector& x);

// y^T = row^T * A.
CVector row_times(const CVector& row, const CMatrix& a);

CVector conj(const CVector& v);

// Circularly symmetric complex gaussian entries, E|z|^2 = variance.
CVector sample_cgauss(SeededRng& rng, std::size_t len, double variance);

}  // namespace leomfris::numerics
