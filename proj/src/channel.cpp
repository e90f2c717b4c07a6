#include "leomfris/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace leomfris::channel {

void ChannelParams::validate() const {
  if (h0 <= 0.0 || k0 <= 0.0 || beta0 <= 0.0 || lambda <= 0.0 || d_elem <= 0.0)
    throw std::invalid_argument("ChannelParams: all parameters must be > 0");
}

CVector steering_vector(std::size_t n, double phi, double theta,
                        const ChannelParams& p, SteeringKind kind) {
  p.validate();
  const double f = (kind == SteeringKind::SinSin)
                       ? std::sin(phi) * std::sin(theta)
                       : std::sin(phi) * std::cos(theta);
  const double step = -2.0 * std::numbers::pi / p.lambda * p.d_elem * f;
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double arg = step * static_cast<double>(i);
    v[i] = Complex{std::cos(arg), std::sin(arg)};
  }
  return v;
}

CMatrix los_matrix(std::size_t m_h, std::size_t m_v, std::size_t n,
                   const SteeringAngles& a, const ChannelParams& p) {
  const CVector av =
      steering_vector(m_v, a.phi_r, a.theta_r, p, SteeringKind::SinSin);
  const CVector ah =
      steering_vector(m_h, a.phi_r, a.theta_r, p, SteeringKind::SinCos);
  const CVector at =
      steering_vector(n, a.phi_t, a.theta_t, p, SteeringKind::SinCos);
  const CVector flat = numerics::kron(av, numerics::kron(ah, at));
  // Row-major fill: element row m = iv*m_h + ih, column = departure index.
  CMatrix out(m_v * m_h, n);
  out.data() = flat;
  return out;
}

CVector los_vector(std::size_t n, double phi, double theta,
                   const ChannelParams& p) {
  return steering_vector(n, phi, theta, p, SteeringKind::SinSin);
}

namespace {

double path_amplitude(double distance, const ChannelParams& p) {
  if (distance <= 0.0)
    throw std::invalid_argument("rician: distance must be > 0");
  return std::sqrt(p.h0 * std::pow(distance, -p.k0));
}

}  // namespace

CMatrix rician(const CMatrix& los, double distance, const ChannelParams& p,
               SeededRng& rng) {
  p.validate();
  const double amp = path_amplitude(distance, p);
  const double c_los = std::sqrt(p.beta0 / (p.beta0 + 1.0));
  const double c_nlos = std::sqrt(1.0 / (p.beta0 + 1.0));
  const CVector nlos = numerics::sample_cgauss(rng, los.data().size(), 1.0);
  CMatrix out(los.rows(), los.cols());
  for (std::size_t i = 0; i < los.data().size(); ++i)
    out.data()[i] = amp * (c_los * los.data()[i] + c_nlos * nlos[i]);
  return out;
}

CVector rician(const CVector& los, double distance, const ChannelParams& p,
               SeededRng& rng) {
  p.validate();
  const double amp = path_amplitude(distance, p);
  const double c_los = std::sqrt(p.beta0 / (p.beta0 + 1.0));
  const double c_nlos = std::sqrt(1.0 / (p.beta0 + 1.0));
  const CVector nlos = numerics::sample_cgauss(rng, los.size(), 1.0);
  CVector out(los.size());
  for (std::size_t i = 0; i < los.size(); ++i)
    out[i] = amp * (c_los * los[i] + c_nlos * nlos[i]);
  return out;
}

CVector combined_channel(const CVector& h, const CVector& r,
                         const CMatrix& theta, const CMatrix& big_h) {
  if (theta.rows() != theta.cols() || theta.rows() != r.size() ||
      big_h.rows() != r.size() || big_h.cols() != h.size())
    throw std::invalid_argument("combined_channel: dimension mismatch");
  const CVector reflected =
      numerics::row_times(numerics::row_times(numerics::conj(r), theta), big_h);
  CVector g(h.size());
  for (std::size_t n = 0; n < h.size(); ++n)
    g[n] = std::conj(h[n]) + reflected[n];
  return g;
}

double sinr(const std::vector<std::vector<CVector>>& g,
            const std::vector<std::vector<CVector>>& w, double sigma_sq,
            std::size_t l, std::size_t k, InterferenceMode mode) {
  if (sigma_sq < 0.0) throw std::invalid_argument("sinr: negative noise power");
  if (l >= g.size() || g.size() != w.size())
    throw std::invalid_argument("sinr: index out of range");
  const std::size_t num_users = g[l].size();
  if (k >= num_users) throw std::invalid_argument("sinr: index out of range");

  const double signal = std::norm(numerics::dot(g[l][k], w[l][k]));
  double denom = sigma_sq;
  for (std::size_t kp = 0; kp < num_users; ++kp) {
    if (kp == k) continue;
    denom += std::norm(numerics::dot(g[l][k], w[l][kp]));
  }
  for (std::size_t lp = 0; lp < g.size(); ++lp) {
    if (lp == l) continue;
    for (std::size_t kp = 0; kp < num_users; ++kp) {
      if (mode == InterferenceMode::AsWritten && kp == k) continue;
      denom += std::norm(numerics::dot(g[lp][k], w[lp][kp]));
    }
  }
  return signal / denom;
}

double rate(double sinr_value) {
  if (sinr_value < 0.0) throw std::invalid_argument("rate: negative SINR");
  return std::log2(1.0 + sinr_value);
}

}  // namespace leomfris::channel
