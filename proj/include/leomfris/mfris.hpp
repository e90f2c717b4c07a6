// Multi-functional RIS surface model: per-element configuration, nonlinear
// energy harvesting, and surface power consumption.
#pragma once

#include <cstddef>
#include <vector>

#include "leomfris/numerics.hpp"

namespace leomfris::mfris {

using numerics::CMatrix;
using numerics::Complex;
using numerics::CVector;
using numerics::SeededRng;

// Per-element state. alpha in [0,1] splits signal energy between reflection
// (alpha) and harvesting (1-alpha); beta >= 0 is the reflection amplification
// factor; theta is the phase shift in radians.
struct MfRisConfig {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> theta;

  std::size_t elements() const { return alpha.size(); }
  void validate() const;
};

// Logistic harvesting model constants.
struct HarvestParams {
  double z = 0.024;  // saturation power, W
  double a = 150.0;  // slope
  double q = 0.014;  // turn-on threshold, W

  void validate() const;
};

struct RisPowerParams {
  std::size_t levels_alpha = 2;   // quantization levels of the mode bit
  std::size_t levels_beta = 10;   // amplitude levels
  std::size_t levels_theta = 8;   // phase levels
  double p_pin = 0.33e-3;         // per-element PIN diode power, W
  double p_c = 10.0;              // static circuit power, W
  double xi = 1.1;                // output amplifier inefficiency

  void validate() const;
};

// Diagonal configuration matrix diag(alpha_m * sqrt(beta_m) * e^{j theta_m}).
CMatrix config_matrix(const MfRisConfig& c);

// Harvest selection matrix of element m: diagonal, (m,m) = 1 - alpha_m,
// all other entries zero.
CMatrix eh_matrix(std::size_t m, double alpha_m, std::size_t num_elements);

// RF power captured by element m for harvesting:
//   (1 - alpha_m)^2 * |row_m(H) * w_sum + noise_m|^2
// where w_sum is the sum of every transmitter's beamformers arriving through
// this surface's own mounted channel H.
double received_rf_power(std::size_t m, const CMatrix& big_h,
                         const CVector& w_sum, double alpha_m,
                         Complex noise_m);
// Convenience overload drawing noise_m ~ CN(0, sigma_m_sq) from rng.
double received_rf_power(std::size_t m, const CMatrix& big_h,
                         const CVector& w_sum, double alpha_m,
                         double sigma_m_sq, SeededRng& rng);

// Nonlinear harvested power:
//   P_h = (Y - Z*Omega) / (1 - Omega),  Y = Z / (1 + e^{-a (p_rf - q)}),
//   Omega = 1 / (1 + e^{a q}).
// Zero input gives exactly zero output; output is bounded by [0, Z].
double harvested_power(double p_rf, const HarvestParams& hp);

// Radiated output power of the surface:
//   sum_k ||Theta * H * w_k||^2 + M * sigma_m_sq * ||Theta||_F^2.
double ris_output_power(const CMatrix& theta, const CMatrix& big_h,
                        const std::vector<CVector>& w, double sigma_m_sq);

// Total surface power draw:
//   0.5 * (log2 La + log2 Lb + 2*log2 Lt) * M * p_pin + p_c + xi * p_out.
// Quantization levels below 2 are invalid.
double ris_power_consumption(const MfRisConfig& c, double p_out,
                             const RisPowerParams& rp);

}  // namespace leomfris::mfris
