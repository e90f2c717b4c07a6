#include "leomfris/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace leomfris::numerics {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

std::uint64_t SeededRng::next_u64() { return engine_(); }

double SeededRng::uniform() {
  // 53-bit mantissa, exact arithmetic: identical on every conforming platform.
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::gaussian() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

SeededRng SeededRng::substream(std::uint64_t stream) const {
  return SeededRng(mix64(seed_, stream));
}

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  std::size_t p = 0;
  for (const Complex& ai : a)
    for (const Complex& bj : b) out[p++] = ai * bj;
  return out;
}

CMatrix hermitian(const CMatrix& a) {
  CMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

double frob_norm_sq(const CMatrix& a) {
  double s = 0.0;
  for (const Complex& z : a.data()) s += std::norm(z);
  return s;
}

double norm_sq(const CVector& v) {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return s;
}

Complex dot(const CVector& a, const CVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: length mismatch");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

CVector matvec(const CMatrix& a, const CVector& x) {
  if (a.cols() != x.size())
    throw std::invalid_argument("matvec: dimension mismatch");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s{0.0, 0.0};
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CVector row_times(const CVector& row, const CMatrix& a) {
  if (row.size() != a.rows())
    throw std::invalid_argument("row_times: dimension mismatch");
  CVector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    Complex s{0.0, 0.0};
    for (std::size_t i = 0; i < a.rows(); ++i) s += row[i] * a(i, j);
    y[j] = s;
  }
  return y;
}

CVector conj(const CVector& v) {
  CVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::conj(v[i]);
  return out;
}

CVector sample_cgauss(SeededRng& rng, std::size_t len, double variance) {
  if (variance < 0.0)
    throw std::invalid_argument("sample_cgauss: negative variance");
  const double s = std::sqrt(variance / 2.0);
  CVector out(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double re = rng.gaussian() * s;
    const double im = rng.gaussian() * s;
    out[i] = Complex{re, im};
  }
  return out;
}

}  // namespace leomfris::numerics
