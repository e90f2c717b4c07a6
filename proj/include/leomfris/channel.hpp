// Rician LEO-ground channel: steering vectors, LoS structure, per-link fading,
// combined direct+reflected channel and SINR/rate.
#pragma once

#include <cstddef>
#include <vector>

#include "leomfris/numerics.hpp"

namespace leomfris::channel {

using numerics::CMatrix;
using numerics::Complex;
using numerics::CVector;
using numerics::SeededRng;

// Departure (t) and arrival (r) angle pairs in radians. phi is the polar angle
// of the link direction, theta the azimuth.
struct SteeringAngles {
  double phi_t = 0.0;
  double theta_t = 0.0;
  double phi_r = 0.0;
  double theta_r = 0.0;
};

struct ChannelParams {
  double h0 = 0.01;      // reference power gain at unit distance (-20 dB)
  double k0 = 2.2;       // pathloss exponent
  double beta0 = 1.9952620100427702;  // Rician factor, linear (3 dB)
  double lambda = 0.15;  // carrier wavelength, m
  double d_elem = 0.075; // antenna element spacing, m

  void validate() const;
};

// Spatial frequency applied to the uniform array phase ramp.
enum class SteeringKind { SinSin, SinCos };

// Entry i = exp(-j * (2*pi/lambda) * i * d_elem * f), f per kind:
// SinSin: sin(phi)*sin(theta), SinCos: sin(phi)*cos(theta). All entries have
// unit magnitude.
CVector steering_vector(std::size_t n, double phi, double theta,
                        const ChannelParams& p, SteeringKind kind);

// LoS matrix of the LEO->RIS link: Kronecker product of the vertical arrival
// factor (m_v entries, sin*sin), horizontal arrival factor (m_h entries,
// sin*cos) and departure factor (n entries, sin*cos), in that order, reshaped
// row-major into (m_v*m_h) x n. Rank one by construction.
CMatrix los_matrix(std::size_t m_h, std::size_t m_v, std::size_t n,
                   const SteeringAngles& a, const ChannelParams& p);

// LoS vector of a direct link (LEO->user or RIS->user): sin*sin steering with
// the link's departure angles.
CVector los_vector(std::size_t n, double phi, double theta,
                   const ChannelParams& p);

// Rician fading around a LoS component:
//   sqrt(h0 * d^-k0) * (sqrt(beta0/(beta0+1)) * los + sqrt(1/(beta0+1)) * nlos)
// with nlos entries CN(0,1) drawn from rng. distance > 0 required.
CMatrix rician(const CMatrix& los, double distance, const ChannelParams& p,
               SeededRng& rng);
CVector rician(const CVector& los, double distance, const ChannelParams& p,
               SeededRng& rng);

// Combined channel row vector g = h^H + r^H * Theta * H (length = H.cols()).
CVector combined_channel(const CVector& h, const CVector& r,
                         const CMatrix& theta, const CMatrix& big_h);

// Inter-system interference sum: AsWritten excludes the served user's index
// from other transmitters' beams (as the equation is printed); AllUsers keeps
// every beam of other transmitters.
enum class InterferenceMode { AsWritten, AllUsers };

// SINR of pair (l, k). g[l][k] and w[l][k] are length-N row/column vectors.
// Numerator |g_lk * w_lk|^2; denominator adds own-transmitter interference
// over k' != k, other-transmitter interference per mode, and sigma_sq.
double sinr(const std::vector<std::vector<CVector>>& g,
            const std::vector<std::vector<CVector>>& w, double sigma_sq,
            std::size_t l, std::size_t k, InterferenceMode mode);

// Achievable rate log2(1 + sinr_value), bits/s/Hz.
double rate(double sinr_value);

// Per-LEO slot realization. h and r are indexed by user.
struct ChannelRealization {
  CMatrix big_h;          // LEO array -> own RIS, M x N
  std::vector<CVector> h; // LEO array -> user k, length N
  std::vector<CVector> r; // RIS -> user k, length M
};

}  // namespace leomfris::channel
