#include "leomfris/mfris.hpp"

#include <cmath>
#include <stdexcept>

namespace leomfris::mfris {

void MfRisConfig::validate() const {
  if (beta.size() != alpha.size() || theta.size() != alpha.size())
    throw std::invalid_argument("MfRisConfig: per-element arrays must agree");
  for (double a : alpha)
    if (a < 0.0 || a > 1.0)
      throw std::invalid_argument("MfRisConfig: alpha outside [0,1]");
  for (double b : beta)
    if (b < 0.0) throw std::invalid_argument("MfRisConfig: negative beta");
}

void HarvestParams::validate() const {
  if (z <= 0.0 || a <= 0.0 || q <= 0.0)
    throw std::invalid_argument("HarvestParams: all parameters must be > 0");
}

void RisPowerParams::validate() const {
  if (levels_alpha < 2 || levels_beta < 2 || levels_theta < 2)
    throw std::invalid_argument("RisPowerParams: quantization levels must be >= 2");
  if (p_pin < 0.0 || p_c < 0.0 || xi < 0.0)
    throw std::invalid_argument("RisPowerParams: negative power parameter");
}

CMatrix config_matrix(const MfRisConfig& c) {
  c.validate();
  const std::size_t m = c.elements();
  CMatrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const double mag = c.alpha[i] * std::sqrt(c.beta[i]);
    out(i, i) = Complex{mag * std::cos(c.theta[i]), mag * std::sin(c.theta[i])};
  }
  return out;
}

CMatrix eh_matrix(std::size_t m, double alpha_m, std::size_t num_elements) {
  if (m >= num_elements)
    throw std::invalid_argument("eh_matrix: element index out of range");
  if (alpha_m < 0.0 || alpha_m > 1.0)
    throw std::invalid_argument("eh_matrix: alpha outside [0,1]");
  CMatrix out(num_elements, num_elements);
  out(m, m) = Complex{1.0 - alpha_m, 0.0};
  return out;
}

double received_rf_power(std::size_t m, const CMatrix& big_h,
                         const CVector& w_sum, double alpha_m,
                         Complex noise_m) {
  if (m >= big_h.rows())
    throw std::invalid_argument("received_rf_power: element index out of range");
  if (big_h.cols() != w_sum.size())
    throw std::invalid_argument("received_rf_power: dimension mismatch");
  if (alpha_m < 0.0 || alpha_m > 1.0)
    throw std::invalid_argument("received_rf_power: alpha outside [0,1]");
  Complex s = noise_m;
  for (std::size_t n = 0; n < big_h.cols(); ++n) s += big_h(m, n) * w_sum[n];
  const double share = 1.0 - alpha_m;
  return share * share * std::norm(s);
}

double received_rf_power(std::size_t m, const CMatrix& big_h,
                         const CVector& w_sum, double alpha_m,
                         double sigma_m_sq, SeededRng& rng) {
  const CVector n = numerics::sample_cgauss(rng, 1, sigma_m_sq);
  return received_rf_power(m, big_h, w_sum, alpha_m, n[0]);
}

double harvested_power(double p_rf, const HarvestParams& hp) {
  hp.validate();
  if (p_rf < 0.0)
    throw std::invalid_argument("harvested_power: negative input power");
  // Both logistic terms share one expression shape so the zero-input response
  // is exactly zero; the clamp absorbs sub-ulp rounding just above the knee.
  const double s0 = 1.0 / (1.0 + std::exp(hp.a * hp.q));
  const double sp = 1.0 / (1.0 + std::exp(-hp.a * (p_rf - hp.q)));
  return std::max(0.0, hp.z * (sp - s0) / (1.0 - s0));
}

double ris_output_power(const CMatrix& theta, const CMatrix& big_h,
                        const std::vector<CVector>& w, double sigma_m_sq) {
  if (theta.rows() != theta.cols() || theta.rows() != big_h.rows())
    throw std::invalid_argument("ris_output_power: dimension mismatch");
  if (sigma_m_sq < 0.0)
    throw std::invalid_argument("ris_output_power: negative noise power");
  double p = 0.0;
  for (const CVector& wk : w)
    p += numerics::norm_sq(
        numerics::matvec(theta, numerics::matvec(big_h, wk)));
  p += static_cast<double>(theta.rows()) * sigma_m_sq * numerics::frob_norm_sq(theta);
  return p;
}

double ris_power_consumption(const MfRisConfig& c, double p_out,
                             const RisPowerParams& rp) {
  c.validate();
  rp.validate();
  if (p_out < 0.0)
    throw std::invalid_argument("ris_power_consumption: negative output power");
  const double bits = std::log2(static_cast<double>(rp.levels_alpha)) +
                      std::log2(static_cast<double>(rp.levels_beta)) +
                      2.0 * std::log2(static_cast<double>(rp.levels_theta));
  const double pin = 0.5 * bits * static_cast<double>(c.elements()) * rp.p_pin;
  return pin + rp.p_c + rp.xi * p_out;
}

}  // namespace leomfris::mfris
