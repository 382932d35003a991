#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "sng/fields.hpp"
#include "sng/potentials.hpp"

namespace sng {

/// Soliton factor phi = psi_nl / psi_l restricted to the pilot's mask.
struct SolitonState {
  WaveField phi;           // zero outside the mask
  WaveField phi_gradient;  // d(phi)/dx on the mask, zero outside
  std::vector<std::uint8_t> mask;
  double x0 = 0.0;
  double norm_sq = 0.0;
  double width = 0.0;  // rms of |phi|^2 about x0
  double valid_fraction = 0.0;

  /// Amplitude e-folding length of a Gaussian with this rms width.
  double extent() const;
};

/// Minimum fraction of the domain on which the pilot must be resolvable.
inline constexpr double kMinValidFraction = 0.01;

/// Throws ExtractionError when the mask covers less than kMinValidFraction
/// of the domain, the soliton has zero norm, or x0 falls off the mask.
SolitonState extract_soliton(const WaveField& psi_nl, const WaveField& psi_l);

/// (hbar/m) dS_L/dx at x0, linearly interpolated.
double v_dbb(const WaveField& psi_l, double x0, const PhysParams& phys = {});

struct InternalVelocity {
  double value = 0.0;
  double imaginary = 0.0;  // should vanish; kept as a diagnostic
};

InternalVelocity internal_velocity(const SolitonState& phi, const PhysParams& phys = {});
double v_int(const SolitonState& phi, const PhysParams& phys = {});

/// Second-order finite-difference derivative of a sampled series, with
/// one-sided three-point formulas at the ends. Sample times may be uneven.
std::vector<double> time_derivative(const std::vector<double>& times,
                                    const std::vector<double>& values);
std::vector<double> v_drift(const std::vector<double>& times, const std::vector<SolitonState>& states);

/// Everything measured on one pair (psi_nl, psi_l) at one output time.
struct GuidanceSample {
  double t = 0.0;
  double x0 = 0.0;
  double v_dbb = 0.0;
  double v_int = 0.0;
  double v_int_imag = 0.0;
  double norm_sq_phi = 0.0;
  double a_l_sq_at_x0 = 0.0;
  double log_amp_grad_at_x0 = 0.0;  // (dA_L/dx)/A_L
  double phase_lap_at_x0 = 0.0;     // d2S_L/dx2
  double width = 0.0;
  double valid_fraction = 0.0;
  /// Terms dropped from the exact barycentre velocity to obtain
  /// v_dbb + v_int (reported, never asserted).
  double discarded = 0.0;
};

GuidanceSample sample_guidance(const WaveField& psi_nl, const WaveField& psi_l, double t,
                               const PhysParams& phys = {});

struct VelocityDecomposition {
  double t = 0.0;
  double x0 = 0.0;
  double v_drift = 0.0;
  double v_dbb = 0.0;
  double v_int = 0.0;
  double residual_p1 = 0.0;
  double norm_sq_phi = 0.0;
  double a_l_sq_at_x0 = 0.0;
  double p2_product = 0.0;
  double norm_rate_residual = 0.0;
  double width = 0.0;
  double valid_fraction = 0.0;
  double norm_rate_lhs = 0.0;
  double norm_rate_rhs = 0.0;
  double discarded = 0.0;
  double v_int_imag = 0.0;
};

/// Floor used in every relative residual.
inline constexpr double kResidualFloor = 1e-12;

/// Predicted d<phi|phi>/dt from the pilot at x0.
double norm_rate_prediction(double phase_lap_at_x0, double log_amp_grad_at_x0, double norm_sq,
                            double v_int, const PhysParams& phys = {});
double relative_residual(double measured, double predicted);

/// (measured - predicted)/max(|measured|, |predicted|, floor) at one time.
double norm_rate_residual(const WaveField& psi_l, const SolitonState& phi, double measured_rate,
                          const PhysParams& phys = {});

/// Differentiates the barycentre and norm series (needs >= 3 samples).
std::vector<VelocityDecomposition> decompose(const std::vector<GuidanceSample>& samples,
                                             const PhysParams& phys = {});

struct SeriesReport {
  double max_value = 0.0;
  std::vector<double> series;
};

/// max_t |v_drift - v_dbb - v_int| / max_t |v_drift|.
SeriesReport property1_residual(const std::vector<VelocityDecomposition>& log);
/// max_t |p2_product - 1|.
SeriesReport property2_check(const std::vector<VelocityDecomposition>& log);
/// max_t |norm_rate_residual|.
SeriesReport norm_rate_report(const std::vector<VelocityDecomposition>& log);
/// max_t |discarded| / max_t |v_drift|.
SeriesReport discarded_terms_report(const std::vector<VelocityDecomposition>& log);

struct StabilityReport {
  bool stable = true;
  double min_valid_fraction = 1.0;
  double max_width_ratio = 1.0;
};

/// Stable iff valid_fraction >= kMinValidFraction and width <= 3 width(0)
/// at every sample.
StabilityReport soliton_stability(const std::vector<VelocityDecomposition>& log);

inline constexpr const char* kGuidanceCsvHeader =
    "t,x0,v_drift,v_dbb,v_int,residual_p1,norm_sq_phi,A_L_sq_at_x0,p2_product,"
    "norm_rate_residual,width,valid_fraction";

void write_guidance_csv(std::ostream& out, const std::vector<VelocityDecomposition>& log);
void write_guidance_csv(const std::filesystem::path& path,
                        const std::vector<VelocityDecomposition>& log);

}  // namespace sng
