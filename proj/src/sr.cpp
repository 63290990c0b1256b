#include "lrvmc/sr.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>

#include "lrvmc/observables.hpp"

namespace lrvmc {

void LearningRateSchedule::validate() const {
  if (!(initial <= peak)) throw std::invalid_argument("learning rate: initial must be <= peak");
  if (warmup_iterations < 0) throw std::invalid_argument("learning rate: negative warm-up");
  if (!(decay_ratio > 0.0 && decay_ratio <= 1.0)) {
    throw std::invalid_argument("learning rate: decay ratio must lie in (0, 1]");
  }
}

double LearningRateSchedule::at(int iteration) const {
  if (iteration < 0) throw std::invalid_argument("learning rate: negative iteration");
  if (iteration < warmup_iterations) {
    return initial + (peak - initial) * iteration / warmup_iterations;
  }
  return peak * std::pow(decay_ratio, iteration - warmup_iterations);
}

void DiagonalShiftSchedule::validate() const {
  if (!(start > 0.0) || !(end > 0.0)) {
    throw std::invalid_argument("diagonal shift: values must stay positive");
  }
  if (total_iterations < 0) throw std::invalid_argument("diagonal shift: negative span");
}

double DiagonalShiftSchedule::at(int iteration) const {
  if (total_iterations <= 1) return start;
  const double t = std::min(iteration, total_iterations - 1) /
                   static_cast<double>(total_iterations - 1);
  return start + (end - start) * t;
}

Eigen::MatrixXd SrStatistics::covariance() const {
  return centered_derivatives * centered_derivatives.transpose() /
         static_cast<double>(sample_count);
}

Eigen::VectorXd SrStatistics::apply_covariance(const Eigen::VectorXd& v, double shift) const {
  Eigen::VectorXd tmp = centered_derivatives.transpose() * v;
  Eigen::VectorXd out = centered_derivatives * tmp / static_cast<double>(sample_count);
  out += shift * v;
  return out;
}

SrStatistics accumulate_sr_statistics(const Eigen::MatrixXd& derivatives,
                                      const Eigen::VectorXd& local_energies) {
  const Eigen::Index p = derivatives.rows();
  const Eigen::Index m = derivatives.cols();
  if (m != local_energies.size()) {
    throw std::invalid_argument("accumulate_sr_statistics: sample count mismatch");
  }
  if (m < 2) throw std::invalid_argument("accumulate_sr_statistics: need >= 2 samples");
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!std::isfinite(local_energies[k]) || !derivatives.col(k).allFinite()) {
      throw std::invalid_argument("accumulate_sr_statistics: non-finite input at sample " +
                                  std::to_string(k));
    }
  }

  SrStatistics stats;
  stats.sample_count = m;

  // Neumaier-compensated means, one pass over the column-major data.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd comp = Eigen::VectorXd::Zero(p);
  double e_sum = 0.0, e_comp = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index i = 0; i < p; ++i) {
      const double v = derivatives(i, k);
      const double t = sum[i] + v;
      comp[i] += std::abs(sum[i]) >= std::abs(v) ? (sum[i] - t) + v : (v - t) + sum[i];
      sum[i] = t;
    }
    const double t = e_sum + local_energies[k];
    e_comp += std::abs(e_sum) >= std::abs(local_energies[k])
                  ? (e_sum - t) + local_energies[k]
                  : (local_energies[k] - t) + e_sum;
    e_sum = t;
  }
  stats.mean_derivatives = (sum + comp) / static_cast<double>(m);
  stats.mean_energy = (e_sum + e_comp) / static_cast<double>(m);

  stats.centered_derivatives = derivatives;
  stats.centered_derivatives.colwise() -= stats.mean_derivatives;
  const Eigen::VectorXd centered_e = local_energies.array() - stats.mean_energy;
  stats.force = stats.centered_derivatives * centered_e / static_cast<double>(m);
  stats.energy_variance = centered_e.squaredNorm() / static_cast<double>(m - 1);
  return stats;
}

namespace {

Eigen::VectorXd solve_dense(const SrStatistics& stats, double shift, SrSolveInfo& info) {
  Eigen::MatrixXd s = stats.covariance();
  s.diagonal().array() += shift;
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    // One escalation of the shift, then give up.
    s.diagonal().array() += 9.0 * shift;
    llt.compute(s);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("sr_update: covariance not positive definite after shift x10");
    }
    info.shift_used = 10.0 * shift;
  } else {
    info.shift_used = shift;
  }
  return llt.solve(stats.force);
}

Eigen::VectorXd solve_cg(const SrStatistics& stats, double shift, SrSolveInfo& info) {
  const Eigen::Index p = stats.force.size();
  info.shift_used = shift;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd r = stats.force;
  Eigen::VectorXd d = r;
  double rr = r.squaredNorm();
  const double target = std::max(1e-20 * rr, 1e-24);
  const int max_iter = static_cast<int>(std::min<Eigen::Index>(p, 1000));
  int it = 0;
  while (it < max_iter && rr > target) {
    const Eigen::VectorXd ad = stats.apply_covariance(d, shift);
    const double alpha = rr / d.dot(ad);
    if (!std::isfinite(alpha)) {
      throw NumericalFailure("sr_update: conjugate-gradient breakdown");
    }
    x += alpha * d;
    r -= alpha * ad;
    const double rr_new = r.squaredNorm();
    d = r + (rr_new / rr) * d;
    rr = rr_new;
    ++it;
  }
  info.cg_iterations = it;
  return x;
}

}  // namespace

Eigen::VectorXd sr_update(const Eigen::VectorXd& params, const SrStatistics& stats,
                          double learning_rate, double shift, Eigen::Index dense_threshold,
                          SrSolveInfo* info) {
  if (stats.force.size() != params.size()) {
    throw std::invalid_argument("sr_update: statistics dimension mismatch");
  }
  if (!(shift > 0.0)) throw std::invalid_argument("sr_update: shift must be positive");
  SrSolveInfo local;
  local.dense = params.size() <= dense_threshold;
  const Eigen::VectorXd delta =
      local.dense ? solve_dense(stats, shift, local) : solve_cg(stats, shift, local);
  const double f_norm = stats.force.norm();
  local.residual =
      f_norm > 0.0
          ? (stats.apply_covariance(delta, local.shift_used) - stats.force).norm() / f_norm
          : 0.0;
  if (info) *info = local;
  return params - learning_rate * delta;
}

const char* train_trace_header() {
  return "iteration,energy,energy_variance,v_score,learning_rate,diagonal_shift,"
         "acceptance_local,acceptance_global,solver_residual";
}

const char* acceptance_log_header() { return "iteration,move_type,proposed,accepted,rate"; }

namespace {

void append_value(std::string& row, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

}  // namespace

void write_trace_row(std::ostream& out, const IterationRecord& rec) {
  std::string row = std::to_string(rec.iteration);
  for (double v : {rec.energy, rec.energy_variance, rec.v_score, rec.learning_rate,
                   rec.diagonal_shift, rec.acceptance_local, rec.acceptance_global,
                   rec.solver_residual}) {
    row += ',';
    append_value(row, v);
  }
  out << row << '\n';
}

TrainResult train(const TransverseFieldIsingModel& model, const Ansatz& ansatz,
                  Eigen::VectorXd theta, const SamplerConfig& sampler_config,
                  const TrainOptions& options) {
  options.learning_rate.validate();
  sampler_config.validate();
  DiagonalShiftSchedule shift = options.diagonal_shift;
  if (shift.total_iterations <= 0) shift.total_iterations = options.max_iterations;
  shift.validate();

  const int n = model.n_sites();
  const bool tabulate = n <= options.table_threshold;
  auto make_callback = [&](const Eigen::VectorXd& params) {
    return tabulate ? make_tabulated_log_psi(ansatz, params)
                    : make_batched_log_psi(ansatz, params);
  };

  BatchedLogPsiFn callback = make_callback(theta);
  SamplerState state = initialize_sampler(sampler_config, n, callback);

  const auto wall_start = std::chrono::steady_clock::now();
  const std::clock_t cpu_start = std::clock();
  auto elapsed_seconds = [&]() {
    if (options.budget_wall_clock) {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start)
          .count();
    }
    return static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
  };

  TrainResult result;
  Eigen::MatrixXd derivatives(ansatz.parameter_count(), sampler_config.samples_per_iteration);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (options.budget_seconds > 0.0 && elapsed_seconds() >= options.budget_seconds) {
      result.budget_exhausted = true;
      break;
    }
    const double lr = options.learning_rate.at(it);
    const double delta_sr = shift.at(it);

    const std::array<MoveStats, 2> stats_before = state.stats;
    SampleBatch batch = sample_batch(state, sampler_config, callback);
    Eigen::VectorXd energies;
    try {
      energies = local_energy_batch(model, batch.configurations, batch.log_psi, callback);
    } catch (const NonFiniteLogPsiError& err) {
      if (options.checkpoint_hook) options.checkpoint_hook(it, theta);
      throw NumericalFailure(std::string("train: aborting, ") + err.what());
    }
    if (!energies.allFinite()) {
      if (options.checkpoint_hook) options.checkpoint_hook(it, theta);
      throw NumericalFailure("train: non-finite local energy at iteration " +
                             std::to_string(it));
    }

    for (Eigen::Index k = 0; k < batch.configurations.cols(); ++k) {
      const LogAmplitudeResult eval = ansatz.evaluate(theta, batch.configurations.col(k), true);
      derivatives.col(k) = *eval.derivatives;
    }

    const SrStatistics sr_stats = accumulate_sr_statistics(derivatives, energies);
    const VScoreResult vs = v_score(energies, n);

    IterationRecord rec;
    rec.iteration = it;
    rec.energy = sr_stats.mean_energy;
    rec.energy_variance = sr_stats.energy_variance;
    rec.v_score = vs.value;
    rec.learning_rate = lr;
    rec.diagonal_shift = delta_sr;
    {
      const auto& before = stats_before;
      const auto& after = state.stats;
      const auto rate = [](const MoveStats& b, const MoveStats& a) {
        const std::int64_t proposed = a.proposed - b.proposed;
        return proposed > 0 ? static_cast<double>(a.accepted - b.accepted) / proposed : 0.0;
      };
      rec.acceptance_local = rate(before[0], after[0]);
      rec.acceptance_global = rate(before[1], after[1]);
      if (options.acceptance_stream) {
        for (int mv = 0; mv < 2; ++mv) {
          const std::int64_t prop = after[mv].proposed - before[mv].proposed;
          const std::int64_t acc = after[mv].accepted - before[mv].accepted;
          *options.acceptance_stream << it << ',' << (mv == 0 ? "local" : "global") << ','
                                     << prop << ',' << acc << ','
                                     << (prop > 0 ? static_cast<double>(acc) / prop : 0.0)
                                     << '\n';
        }
      }
    }

    SrSolveInfo solve_info;
    theta = sr_update(theta, sr_stats, lr, delta_sr, options.dense_solver_threshold,
                      &solve_info);
    rec.solver_residual = solve_info.residual;

    result.trace.push_back(rec);
    if (options.trace_stream) write_trace_row(*options.trace_stream, rec);
    if (options.verbose) {
      std::fprintf(stderr, "iter %4d  E = %.8f  var = %.3e  vscore = %.3e\n", it, rec.energy,
                   rec.energy_variance, rec.v_score);
    }

    callback = make_callback(theta);
    state.refresh_log_psi(callback);
    result.iterations_completed = it + 1;
    if (options.checkpoint_every > 0 && options.checkpoint_hook &&
        (it + 1) % options.checkpoint_every == 0) {
      options.checkpoint_hook(it + 1, theta);
    }
  }
  result.parameters = std::move(theta);
  return result;
}

}  // namespace lrvmc
