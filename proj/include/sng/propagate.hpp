#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sng/fields.hpp"
#include "sng/potentials.hpp"

namespace sng {

enum class Scheme { strang_split, imaginary_time };

/// How the self-consistent centre <x> enters a Strang step.
///
/// midpoint_predictor: the opening half kick uses <x> at the start of the
/// step; the closing half kick uses <x> recomputed after the kinetic drift,
/// which is exactly the end-of-step value because kicks leave |psi| alone.
/// The step is symmetric and second order.
/// frozen: both half kicks use the start-of-step value.
enum class SelfConsistency { frozen, midpoint_predictor };

enum class TimeDirection { forward, backward };

struct EvolutionSpec {
  double dt = 0.0;
  double t_end = 0.0;
  int output_stride = 1;
  Scheme scheme = Scheme::strang_split;
  SelfConsistency self_consistency = SelfConsistency::midpoint_predictor;
  TimeDirection direction = TimeDirection::forward;
  /// Max allowed edge/peak density ratio at every output time; nullopt
  /// disables the check (plane waves, for instance).
  std::optional<double> boundary_tolerance = 1e-12;
  bool keep_snapshots = false;

  /// Number of steps; throws ConfigError unless t_end/dt is an integer
  /// within 1e-9.
  std::size_t step_count() const;
  void validate() const;
};

/// Stability bound of Strang splitting for a quadratic confinement of total
/// stiffness k: omega*dt < 2.
double strang_dt_max(double total_stiffness, double mass);

/// Default step: one fiftieth of the fastest harmonic period.
double default_dt(double total_stiffness, double mass);

struct TrajectoryLog {
  std::vector<double> times;
  std::vector<double> mean_x;
  std::vector<double> mean_x2;
  std::vector<double> norm_sq;
  std::vector<double> energy;  // per unit squared norm
  std::vector<WaveField> snapshots;
};

struct EvolutionResult {
  TrajectoryLog log;
  WaveField final_state;
  double dt_max = 0.0;  // stability bound used for validation (inf if none)
};

/// Nonlinear part of a mean-field Hamiltonian.
///
/// `potential` fills V_NL[psi] on the grid; `energy` returns the matching
/// interaction energy functional U[psi] (unnormalized), with
/// dU/d|psi|^2 = V_NL up to a constant. An empty `potential` means a
/// linear problem.
struct SelfInteraction {
  std::function<void(std::span<const Complex>, std::span<double>)> potential;
  std::function<double(std::span<const Complex>)> energy;
  double stiffness = 0.0;  // harmonic stiffness contributed, for dt bounds
};

SelfInteraction no_self_interaction();
SelfInteraction harmonic_self_interaction(const Grid1D& grid, double k_self);
SelfInteraction kernel_self_interaction(const Grid1D& grid, const ConvolutionKernel& kernel);

/// Split-step integrator owning one wave. Single writer; not shareable
/// between threads while stepping.
class SplitStepPropagator {
 public:
  SplitStepPropagator(const WaveField& psi0, RealField v_ext, SelfInteraction self, PhysParams phys,
                      SelfConsistency mode = SelfConsistency::midpoint_predictor);

  /// One real-time Strang step of signed length dt.
  void step(double dt);
  /// One imaginary-time Strang step of length dtau (no renormalization).
  void imaginary_step(double dtau);
  void renormalize(double norm_sq);
  /// Optional callback applied to the samples after every real-time step,
  /// e.g. a stochastic velocity kick. None is installed by default.
  using Perturbation = std::function<void(double t, std::span<Complex> psi)>;
  void set_perturbation(Perturbation hook) { perturbation_ = std::move(hook); }

  /// Replaces the samples, keeping the clock.
  void reset(std::span<const Complex> values);

  WaveField state() const;
  std::span<const Complex> values() const noexcept { return psi_; }
  double time() const noexcept { return time_; }
  double squared_norm() const;
  double mean_position() const;
  /// Energy functional <T> + <V_ext> + U, divided by the squared norm.
  double energy() const;
  /// Rayleigh quotient <psi|T + V_ext + V_NL[psi]|psi>/<psi|psi>.
  double eigenvalue() const;

 private:
  void kick(double dt, Complex unit);
  void drift(double dt, Complex unit);
  void fill_self_potential();
  void refresh_factors(double dt, Complex unit);
  double kinetic_energy() const;

  Grid1D grid_;
  std::vector<Complex> psi_;
  RealField v_ext_;
  RealField v_self_;
  RealField k_;
  SelfInteraction self_;
  PhysParams phys_;
  SelfConsistency mode_;
  Perturbation perturbation_;

  // Drift and external half-kick factors for the last (dt, unit) pair.
  double factor_dt_ = 0.0;
  Complex factor_unit_{0.0, 0.0};
  std::vector<Complex> drift_factor_;
  std::vector<Complex> ext_factor_;
  double time_ = 0.0;
};

EvolutionResult evolve(const WaveField& psi0, const RealField& v_ext, const SelfInteraction& self,
                       const EvolutionSpec& spec, const PhysParams& phys = {});

EvolutionResult evolve_linear(const WaveField& psi0, const RealField& v_ext,
                              const EvolutionSpec& spec, const PhysParams& phys = {});

/// Harmonic trap plus harmonic self-trap centred on <x>.
EvolutionResult evolve_self_trap(const WaveField& psi0, const HarmonicModelParams& params,
                              const EvolutionSpec& spec, const PhysParams& phys = {});

EvolutionResult evolve_kernel(const WaveField& psi0, const ConvolutionKernel& kernel,
                              const RealField& v_ext, const EvolutionSpec& spec,
                              const PhysParams& phys = {});

struct RelaxOptions {
  double initial_step = 0.01;
  double min_step = 1e-12;
  std::size_t max_iters = 200000;
  std::size_t min_iters = 10;
};

struct RelaxResult {
  WaveField field;
  double eigenvalue = 0.0;
  double functional_energy = 0.0;  // per unit squared norm
  std::size_t iterations = 0;
  std::vector<double> energy_history;
};

/// Static Hamiltonian pieces handed to the relaxation.
struct RelaxModel {
  RealField v_ext;
  SelfInteraction self;
};

/// Normalized gradient flow in imaginary time. Every step renormalizes to
/// target_norm_sq; a step that raises the energy is rejected and the step
/// size halved. Stops when the relative energy change of an accepted step
/// falls below tol. Throws ConvergenceError after max_iters.
RelaxResult imaginary_time_relax(const WaveField& psi0, const RelaxModel& model,
                                 double target_norm_sq, double tol, const RelaxOptions& options = {},
                                 const PhysParams& phys = {});

/// Writes "# t=<t>" followed by "x re im" rows, 17 significant digits.
void write_snapshot(const std::filesystem::path& path, double t, const WaveField& field);
/// Reads a snapshot written by write_snapshot(). Returns the time stamp.
std::pair<double, WaveField> read_snapshot(const std::filesystem::path& path);
/// Writes every snapshot of a log as <dir>/snap_<index>.dat.
std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir,
                                                   const TrajectoryLog& log);

}  // namespace sng
