#include "thermalnet/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "thermalnet/error.hpp"
#include "thermalnet/rng.hpp"

namespace thermalnet {

namespace {

void check_qubits(std::size_t qubits) {
  if (qubits == 0) throw Error(ErrorKind::dimension, "register needs at least one qubit");
  if (qubits > kMaxQubits) {
    throw Error(ErrorKind::capacity, std::to_string(qubits) + " qubits exceed the " +
                                         std::to_string(kMaxQubits) + "-qubit simulator cap");
  }
}

std::vector<std::size_t> complement(std::size_t qubits, const std::vector<std::size_t>& keep) {
  if (keep.empty() || keep.size() >= qubits) {
    throw Error(ErrorKind::query, "partial trace needs a non-empty proper subset of qubits");
  }
  std::vector<bool> kept(qubits, false);
  for (std::size_t q : keep) {
    if (q >= qubits) throw Error(ErrorKind::query, "qubit " + std::to_string(q) + " out of range");
    if (kept[q]) throw Error(ErrorKind::query, "qubit " + std::to_string(q) + " listed twice");
    kept[q] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t q = 0; q < qubits; ++q) {
    if (!kept[q]) rest.push_back(q);
  }
  return rest;
}

std::uint64_t gather(std::uint64_t index, const std::vector<std::size_t>& qubits) {
  std::uint64_t out = 0;
  for (std::size_t k = 0; k < qubits.size(); ++k) out |= ((index >> qubits[k]) & 1u) << k;
  return out;
}

/// Energy of each system basis state, indexed by the little-endian system bits.
std::vector<double> system_energies(const IsingModel& model) {
  const std::size_t n = model.node_count();
  std::vector<double> energies(std::size_t{1} << n);
  std::vector<Spin> spins(n);
  for (std::uint64_t z = 0; z < energies.size(); ++z) {
    for (std::size_t q = 0; q < n; ++q) spins[q] = (z >> q & 1u) ? Spin{-1} : Spin{1};
    energies[z] = energy(model, spins);
  }
  return energies;
}

void check_register(const PureState& state, const IsingModel& model) {
  if (state.qubit_count() != 2 * model.node_count()) {
    throw Error(ErrorKind::dimension,
                "register has " + std::to_string(state.qubit_count()) + " qubits; a " +
                    std::to_string(model.node_count()) + "-node model needs " +
                    std::to_string(2 * model.node_count()));
  }
}

}  // namespace

PureState::PureState(std::size_t qubit_count, std::vector<Complex> amplitudes)
    : qubit_count_(qubit_count), amplitudes_(std::move(amplitudes)) {
  check_qubits(qubit_count_);
  if (amplitudes_.size() != (std::size_t{1} << qubit_count_)) {
    throw Error(ErrorKind::dimension, "statevector needs 2^n amplitudes");
  }
  if (std::abs(norm() - 1.0) > kNormTolerance) {
    throw Error(ErrorKind::model, "statevector is not normalized");
  }
}

PureState PureState::basis(std::size_t qubit_count, std::uint64_t index) {
  check_qubits(qubit_count);
  std::vector<Complex> amplitudes(std::size_t{1} << qubit_count);
  amplitudes.at(index) = 1.0;
  return PureState(qubit_count, std::move(amplitudes));
}

double PureState::norm() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) total += std::norm(a);
  return std::sqrt(total);
}

DensityMatrix::DensityMatrix(std::size_t qubit_count, Eigen::MatrixXcd entries)
    : qubit_count_(qubit_count), entries_(std::move(entries)) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubit_count_);
  if (entries_.rows() != dim || entries_.cols() != dim) {
    throw Error(ErrorKind::dimension, "density matrix must be 2^n x 2^n");
  }
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  const Eigen::MatrixXcd hermitian = 0.5 * (entries_ + entries_.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(hermitian, Eigen::EigenvaluesOnly)
      .eigenvalues();
}

double DensityMatrix::von_neumann_entropy() const {
  double s = 0.0;
  for (double lambda : eigenvalues()) {
    if (lambda > 1e-300) s -= lambda * std::log(lambda);
  }
  return s;
}

bool DensityMatrix::is_physical(double tol, double psd_tol) const {
  if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(trace() - Complex(1.0)) > tol) return false;
  return eigenvalues().minCoeff() >= -psd_tol;
}

void QaoaParams::validate() const {
  if (gammas.empty()) throw Error(ErrorKind::config, "QAOA needs at least one layer");
  if (gammas.size() != betas.size()) {
    throw Error(ErrorKind::config, "gamma and beta lists must have equal length");
  }
}

PureState prepare_purified_mixer_state(std::size_t system_qubits, Temperature T) {
  if (system_qubits == 0) throw Error(ErrorKind::dimension, "need at least one system qubit");
  if (system_qubits > kMaxSystemQubits) {
    throw Error(ErrorKind::capacity, std::to_string(system_qubits) +
                                         " system qubits exceed the cap of " +
                                         std::to_string(kMaxSystemQubits));
  }
  // c e^{+1/2T} and c e^{-1/2T}, written so neither exponential overflows.
  const double plus = 1.0 / std::sqrt(1.0 + std::exp(-2.0 / T.value()));
  const double minus = plus * std::exp(-1.0 / T.value());
  // |++> and |--> expanded in the computational basis of one (S, A) pair
  const double same = 0.5 * (plus + minus);
  const double differ = 0.5 * (plus - minus);

  const std::size_t n = system_qubits;
  std::vector<Complex> amplitudes(std::size_t{1} << (2 * n));
  for (std::uint64_t index = 0; index < amplitudes.size(); ++index) {
    double a = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool s = index >> i & 1u;
      const bool anc = index >> (n + i) & 1u;
      a *= (s == anc) ? same : differ;
    }
    amplitudes[index] = a;
  }
  return PureState(2 * n, std::move(amplitudes));
}

DensityMatrix partial_trace(const PureState& state, const std::vector<std::size_t>& keep) {
  const auto rest = complement(state.qubit_count(), keep);
  const auto rows = static_cast<Eigen::Index>(std::size_t{1} << keep.size());
  const auto cols = static_cast<Eigen::Index>(std::size_t{1} << rest.size());
  Eigen::MatrixXcd psi(rows, cols);
  const auto& amps = state.amplitudes();
  for (std::uint64_t index = 0; index < amps.size(); ++index) {
    psi(gather(index, keep), gather(index, rest)) = amps[index];
  }
  return DensityMatrix(keep.size(), psi * psi.adjoint());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
  const auto rest = complement(rho.qubit_count(), keep);
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << keep.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  const auto full = static_cast<std::uint64_t>(rho.matrix().rows());
  for (std::uint64_t r = 0; r < full; ++r) {
    const auto r_rest = gather(r, rest);
    const auto r_keep = gather(r, keep);
    for (std::uint64_t c = 0; c < full; ++c) {
      if (gather(c, rest) != r_rest) continue;
      out(r_keep, gather(c, keep)) += rho.matrix()(r, c);
    }
  }
  return DensityMatrix(keep.size(), std::move(out));
}

PureState apply_qaoa(PureState state, const IsingModel& model, const QaoaParams& params) {
  check_register(state, model);
  params.validate();
  const std::size_t n = model.node_count();
  const std::size_t qubits = state.qubit_count();
  const std::uint64_t system_mask = (std::uint64_t{1} << n) - 1;
  const auto energies = system_energies(model);
  auto amps = std::move(state).take_amplitudes();

  for (std::size_t layer = 0; layer < params.layers(); ++layer) {
    const double gamma = params.gammas[layer];
    for (std::uint64_t index = 0; index < amps.size(); ++index) {
      amps[index] *= std::polar(1.0, -gamma * energies[index & system_mask]);
    }
    // e^{-i beta (-X)} = cos(beta) I + i sin(beta) X on each system qubit
    const Complex c(std::cos(params.betas[layer]), 0.0);
    const Complex is(0.0, std::sin(params.betas[layer]));
    for (std::size_t q = 0; q < n; ++q) {
      const std::uint64_t bit = std::uint64_t{1} << q;
      for (std::uint64_t index = 0; index < amps.size(); ++index) {
        if (index & bit) continue;
        const Complex x0 = amps[index];
        const Complex x1 = amps[index | bit];
        amps[index] = c * x0 + is * x1;
        amps[index | bit] = is * x0 + c * x1;
      }
    }
  }
  return PureState(qubits, std::move(amps));
}

std::vector<double> system_distribution(const PureState& state, std::size_t system_qubits) {
  if (system_qubits == 0 || system_qubits > state.qubit_count()) {
    throw Error(ErrorKind::dimension, "invalid system qubit count");
  }
  const std::size_t n = system_qubits;
  std::vector<double> out(std::size_t{1} << n, 0.0);
  const auto& amps = state.amplitudes();
  for (std::uint64_t index = 0; index < amps.size(); ++index) {
    std::uint64_t config = 0;
    for (std::size_t q = 0; q < n; ++q) config = (config << 1) | (index >> q & 1u);
    out[config] += std::norm(amps[index]);
  }
  return out;
}

double cost_expectation(const PureState& state, const IsingModel& model) {
  check_register(state, model);
  const auto energies = system_energies(model);
  const std::uint64_t system_mask = (std::uint64_t{1} << model.node_count()) - 1;
  double total = 0.0;
  const auto& amps = state.amplitudes();
  for (std::uint64_t index = 0; index < amps.size(); ++index) {
    total += std::norm(amps[index]) * energies[index & system_mask];
  }
  return total;
}

namespace {

struct ObjectiveContext {
  const IsingModel* model;
  const PureState* initial;
  std::size_t layers;
  std::size_t budget;
  std::vector<TraceRow>* trace;
  double best = std::numeric_limits<double>::infinity();
  QaoaParams best_params;
};

QaoaParams unpack(const gsl_vector* x, std::size_t layers) {
  QaoaParams params;
  for (std::size_t l = 0; l < layers; ++l) {
    params.gammas.push_back(gsl_vector_get(x, l));
    params.betas.push_back(gsl_vector_get(x, layers + l));
  }
  return params;
}

double evaluate(ObjectiveContext& ctx, const QaoaParams& params) {
  const double value = cost_expectation(apply_qaoa(*ctx.initial, *ctx.model, params), *ctx.model);
  ctx.trace->push_back({ctx.trace->size(), params, value});
  if (value < ctx.best) {
    ctx.best = value;
    ctx.best_params = params;
  }
  return value;
}

double gsl_objective(const gsl_vector* x, void* raw) {
  auto& ctx = *static_cast<ObjectiveContext*>(raw);
  // Past the budget the simplex only sees a wall; nothing is recorded.
  if (ctx.trace->size() >= ctx.budget) return 1e300;
  return evaluate(ctx, unpack(x, ctx.layers));
}

}  // namespace

ThermalOptimization optimize_thermal(const IsingModel& model, Temperature T, std::size_t layers,
                                     std::size_t budget, std::uint64_t seed,
                                     std::size_t restarts) {
  if (layers < 1) throw Error(ErrorKind::config, "QAOA needs at least one layer");
  if (budget < 1) throw Error(ErrorKind::config, "optimizer budget must be at least 1");
  if (restarts < 1) throw Error(ErrorKind::config, "need at least one restart");
  const PureState initial = prepare_purified_mixer_state(model.node_count(), T);

  std::vector<TraceRow> trace;
  ObjectiveContext ctx{&model, &initial, layers, budget, &trace,
                       std::numeric_limits<double>::infinity(), {}};
  const std::size_t dim = 2 * layers;

  std::vector<QaoaParams> starts;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(seed, r);
    QaoaParams start;
    for (std::size_t l = 0; l < layers; ++l) start.gammas.push_back(rng.uniform() * std::numbers::pi);
    for (std::size_t l = 0; l < layers; ++l) start.betas.push_back(rng.uniform() * std::numbers::pi);
    starts.push_back(std::move(start));
  }

  if (model.is_zero()) {
    evaluate(ctx, starts.front());
  } else {
    gsl_set_error_handler_off();
    const std::size_t share = std::max<std::size_t>(1, budget / restarts);
    gsl_multimin_function function{&gsl_objective, dim, &ctx};
    gsl_vector* x = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    gsl_multimin_fminimizer* minimizer =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);

    for (std::size_t r = 0; r < restarts && trace.size() < budget; ++r) {
      const std::size_t limit = std::min(budget, trace.size() + share);
      if (limit - trace.size() < dim + 1) {
        // not enough evaluations left to build a simplex
        evaluate(ctx, starts[r]);
        continue;
      }
      for (std::size_t l = 0; l < layers; ++l) {
        gsl_vector_set(x, l, starts[r].gammas[l]);
        gsl_vector_set(x, layers + l, starts[r].betas[l]);
      }
      gsl_vector_set_all(step, 0.5);
      ctx.budget = limit;
      gsl_multimin_fminimizer_set(minimizer, &function, x, step);
      while (trace.size() < limit) {
        if (gsl_multimin_fminimizer_iterate(minimizer) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer), 1e-8) == GSL_SUCCESS) {
          break;
        }
      }
      ctx.budget = budget;
    }
    gsl_multimin_fminimizer_free(minimizer);
    gsl_vector_free(step);
    gsl_vector_free(x);
  }

  PureState final_state = apply_qaoa(initial, model, ctx.best_params);
  return {ctx.best_params, std::move(final_state), ctx.best, std::move(trace)};
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  const std::size_t p = trace.empty() ? 0 : trace.front().params.layers();
  out << "evaluation_index";
  for (std::size_t l = 1; l <= p; ++l) out << ",gamma_" << l;
  for (std::size_t l = 1; l <= p; ++l) out << ",beta_" << l;
  out << ",objective\n" << std::setprecision(17);
  for (const auto& row : trace) {
    out << row.evaluation;
    for (double g : row.params.gammas) out << ',' << g;
    for (double b : row.params.betas) out << ',' << b;
    out << ',' << row.objective << '\n';
  }
}

SampleSet measure_system(const PureState& state, const std::vector<std::size_t>& system,
                         std::uint64_t shots, std::uint64_t seed, Temperature temperature,
                         std::string model_id) {
  if (shots == 0) throw Error(ErrorKind::config, "shots must be at least 1");
  if (system.empty() || system.size() > state.qubit_count()) {
    throw Error(ErrorKind::query, "invalid system qubit set");
  }
  std::vector<bool> seen(state.qubit_count(), false);
  for (std::size_t q : system) {
    if (q >= state.qubit_count() || seen[q]) throw Error(ErrorKind::query, "invalid system qubit set");
    seen[q] = true;
  }
  const std::size_t m = system.size();
  std::vector<double> cdf(std::size_t{1} << m, 0.0);
  const auto& amps = state.amplitudes();
  for (std::uint64_t index = 0; index < amps.size(); ++index) {
    std::uint64_t config = 0;
    for (std::size_t q : system) config = (config << 1) | (index >> q & 1u);
    cdf[config] += std::norm(amps[index]);
  }
  for (std::size_t k = 1; k < cdf.size(); ++k) cdf[k] += cdf[k - 1];

  std::vector<std::uint64_t> counts(cdf.size(), 0);
  Rng rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform() * cdf.back());
    if (it == cdf.end()) --it;
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  SampleSet samples(std::move(model_id), m, temperature, Backend::qat, seed);
  for (std::size_t k = 0; k < counts.size(); ++k) samples.add(k, counts[k]);
  return samples;
}

}  // namespace thermalnet
