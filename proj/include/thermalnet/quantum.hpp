#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermalnet/ising.hpp"
#include "thermalnet/sample_set.hpp"

namespace thermalnet {

using Complex = std::complex<double>;

/// Statevector register limit: 12 system qubits plus 12 ancillas.
inline constexpr std::size_t kMaxSystemQubits = 12;
inline constexpr std::size_t kMaxQubits = 2 * kMaxSystemQubits;

/// Normalized statevector. Basis indexing is little-endian: qubit q is bit q
/// of the amplitude index, and |0> corresponds to spin +1.
class PureState {
 public:
  static constexpr double kNormTolerance = 1e-10;

  PureState(std::size_t qubit_count, std::vector<Complex> amplitudes);
  static PureState basis(std::size_t qubit_count, std::uint64_t index);

  std::size_t qubit_count() const noexcept { return qubit_count_; }
  const std::vector<Complex>& amplitudes() const noexcept { return amplitudes_; }
  double norm() const;

  std::vector<Complex> take_amplitudes() && { return std::move(amplitudes_); }

 private:
  std::size_t qubit_count_;
  std::vector<Complex> amplitudes_;
};

/// Mixed state on a few qubits, same little-endian convention as PureState.
class DensityMatrix {
 public:
  DensityMatrix(std::size_t qubit_count, Eigen::MatrixXcd entries);

  std::size_t qubit_count() const noexcept { return qubit_count_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return entries_; }

  Complex trace() const { return entries_.trace(); }
  double purity() const;
  /// Ascending eigenvalues of the Hermitian part.
  Eigen::VectorXd eigenvalues() const;
  double von_neumann_entropy() const;
  /// Hermitian, unit trace and positive semidefinite within tolerance.
  bool is_physical(double tol = 1e-10, double psd_tol = 1e-9) const;

 private:
  std::size_t qubit_count_;
  Eigen::MatrixXcd entries_;
};

struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  std::size_t layers() const noexcept { return gammas.size(); }
  void validate() const;
};

/// Purification of the thermal state of H_0 = -sum_i X_i on n system qubits:
/// a product over i of c (e^{1/(2T)} |+>_S|+>_A + e^{-1/(2T)} |->_S|->_A),
/// c = 1/sqrt(2 cosh(1/T)). System qubits are 0..n-1, ancilla i is n+i.
PureState prepare_purified_mixer_state(std::size_t system_qubits, Temperature T);

/// Reduced state on `keep` (kept qubit keep[k] becomes bit k).
DensityMatrix partial_trace(const PureState& state, const std::vector<std::size_t>& keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep);

/// For each layer: e^{-i gamma H_C} then e^{-i beta H_0} on the system
/// qubits 0..n-1 of a 2n-qubit register, with H_C = -sum J Z Z - sum h Z.
PureState apply_qaoa(PureState state, const IsingModel& model, const QaoaParams& params);

/// Z-basis outcome probabilities of the system qubits 0..n-1, indexed like
/// a DistributionTable over nodes 0..n-1 (node 0 most significant, -1 = 1).
std::vector<double> system_distribution(const PureState& state, std::size_t system_qubits);

/// <H_C> = Tr(rho_S H_C) for the system part of `state`.
double cost_expectation(const PureState& state, const IsingModel& model);

struct TraceRow {
  std::size_t evaluation = 0;
  QaoaParams params;
  double objective = 0.0;
};

struct ThermalOptimization {
  QaoaParams params;
  PureState state;
  double objective = 0.0;
  std::vector<TraceRow> trace;
};

inline constexpr std::size_t kDefaultOptimizerBudget = 500;
inline constexpr std::size_t kDefaultRestarts = 5;

/// Minimizes <H_C> of the reduced system state over p QAOA layers applied to
/// the purified mixer state. Nelder-Mead with `restarts` starting points
/// drawn uniformly from [0, pi); `budget` caps the total objective
/// evaluations across restarts.
ThermalOptimization optimize_thermal(const IsingModel& model, Temperature T, std::size_t layers,
                                     std::size_t budget, std::uint64_t seed,
                                     std::size_t restarts = kDefaultRestarts);

/// Writes `evaluation_index,gamma_1..gamma_p,beta_1..beta_p,objective`.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

/// Samples Z-basis outcomes of `system` qubits (qubit system[k] -> spin k,
/// bit 0 -> +1). `temperature` and `model_id` are recorded as metadata.
SampleSet measure_system(const PureState& state, const std::vector<std::size_t>& system,
                         std::uint64_t shots, std::uint64_t seed,
                         Temperature temperature = Temperature(1.0), std::string model_id = {});

}  // namespace thermalnet
