#pragma once

// Continuous uncertainty models for PV output, wind output and load, plus the
// device curves that map weather to power. Every model exposes
// `support_max()` and `interval_mass(lo, hi)`, which is what the discretizer
// in sequence_ops.hpp consumes.

namespace mgsched {

/// Beta-distributed PV output on [0, p_max].
struct PvModel {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double p_max = 0.0;     // kW, may be 0 at night
  double eta = 0.093;     // conversion efficiency
  double area = 1300.0;   // m^2
  double r_max = 1000.0;  // W/m^2

  void validate() const;
  double support_max() const { return p_max; }
  double interval_mass(double lo, double hi) const;
};

/// Weibull wind speed pushed through the piecewise-linear turbine curve.
struct WtModel {
  double k = 2.0;
  double scale = 8.0;  // m/s
  double v_in = 3.0;
  double v_rated = 15.0;
  double v_out = 25.0;
  double p_rated = 60.0;  // kW

  void validate() const;
  double h() const { return v_rated / v_in - 1.0; }
  double support_max() const { return p_rated; }
  double interval_mass(double lo, double hi) const;
};

/// Gaussian load, truncated to [0, p_max] when discretized.
struct LoadModel {
  double mu = 0.0;     // kW
  double sigma = 0.0;  // kW
  double fluctuation = 0.0;
  double p_max = 195.0;  // truncation limit, kW

  static LoadModel from_fluctuation(double mu, double fluctuation, double p_max);

  void validate() const;
  double support_max() const { return p_max; }
  double interval_mass(double lo, double hi) const;
};

double pv_output_pdf(const PvModel& model, double p);
double pv_output_cdf(const PvModel& model, double p);
/// Irradiance (W/m^2) to PV power (kW).
double pv_power_from_irradiance(const PvModel& model, double irradiance);

double wind_speed_pdf(const WtModel& model, double v);
double wind_speed_cdf(const WtModel& model, double v);
double wt_power_curve(const WtModel& model, double v);
/// Density of the ramp segment only; the atoms live in wt_zero_mass() and
/// wt_rated_mass().
double wt_output_pdf(const WtModel& model, double p);
double wt_zero_mass(const WtModel& model);
double wt_rated_mass(const WtModel& model);

double load_pdf(const LoadModel& model, double p);
double load_cdf(const LoadModel& model, double p);

double equivalent_load(double p_load, double p_pv, double p_wt);

}  // namespace mgsched
