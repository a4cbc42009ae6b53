#include "airfl/dc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace airfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Eigen::MatrixXcd project_unit_trace_psd(const Eigen::MatrixXcd& hermitian) {
  const Eigen::MatrixXcd sym = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym);
  Eigen::VectorXd lam = eig.eigenvalues();

  // Simplex projection of the eigenvalue vector by sorted thresholding.
  const int n = static_cast<int>(lam.size());
  std::vector<double> sorted(lam.data(), lam.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double threshold = 0.0;
  for (int j = 0; j < n; ++j) {
    running += sorted[static_cast<std::size_t>(j)];
    const double candidate = (running - 1.0) / (j + 1);
    if (sorted[static_cast<std::size_t>(j)] > candidate) threshold = candidate;
  }
  Eigen::VectorXd projected =
      (lam.array() - threshold).max(0.0).matrix();
  return eig.eigenvectors() * projected.asDiagonal() *
         eig.eigenvectors().adjoint();
}

Eigen::VectorXcd canonicalize_phase(Eigen::VectorXcd x) {
  const double biggest = x.cwiseAbs().maxCoeff();
  if (biggest <= 0.0) return x;
  for (int i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x(i));
    if (mag > 1e-9 * biggest) {
      const std::complex<double> phase = std::conj(x(i)) / mag;
      x *= phase;
      break;
    }
  }
  return x;
}

namespace {

struct Instance {
  std::vector<Eigen::MatrixXcd> outer_products;  // c_k c_k^H
  Eigen::VectorXd w;
  int n = 0;
  int k = 0;
};

Instance make_instance(const LiftedProblem& problem) {
  Instance inst;
  inst.n = problem.dim();
  inst.k = problem.num_constraints();
  inst.w = problem.w;
  inst.outer_products.reserve(static_cast<std::size_t>(inst.k));
  for (int j = 0; j < inst.k; ++j) {
    const Eigen::VectorXcd cj = problem.c.col(j);
    inst.outer_products.push_back(cj * cj.adjoint());
  }
  return inst;
}

void validate(const LiftedProblem& problem) {
  if (problem.c.size() == 0 || problem.num_constraints() < 1) {
    throw std::invalid_argument("dc solve: empty problem");
  }
  if (problem.w.size() != problem.num_constraints()) {
    throw std::invalid_argument("dc solve: weight count mismatch");
  }
  if (!problem.c.allFinite() || !problem.w.allFinite()) {
    throw std::invalid_argument("dc solve: non-finite problem data");
  }
  for (int j = 0; j < problem.num_constraints(); ++j) {
    if (!(problem.w(j) > 0.0)) {
      throw std::invalid_argument("dc solve: weights must be positive");
    }
    if (problem.c.col(j).norm() == 0.0) {
      throw std::invalid_argument("dc solve: constraint vector is zero");
    }
  }
}

Eigen::VectorXd constraint_traces(const Instance& inst,
                                  const Eigen::MatrixXcd& u_mat) {
  Eigen::VectorXd t(inst.k);
  for (int j = 0; j < inst.k; ++j) {
    t(j) = (inst.outer_products[static_cast<std::size_t>(j)]
                .cwiseProduct(u_mat.conjugate()))
               .sum()
               .real();
  }
  return t;
}

double max_ratio(const Instance& inst, const Eigen::VectorXd& t) {
  double worst = 0.0;
  for (int j = 0; j < inst.k; ++j) {
    if (!(t(j) > 0.0)) return kInf;
    worst = std::max(worst, inst.w(j) / t(j));
  }
  return worst;
}

double real_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

// Log-sum-exp smoothing of max_k w_k/t_k at dimensionless sharpness alpha,
// referenced to the scale m0 (> 0). Returns the smoothed value and softmax
// weights; the smoothed value upper-bounds the true max by m0*log(K)/alpha.
double smoothed_max(const Instance& inst, const Eigen::VectorXd& t,
                    double alpha, double m0, Eigen::VectorXd* weights) {
  Eigen::VectorXd r(inst.k);
  for (int j = 0; j < inst.k; ++j) {
    if (!(t(j) > 0.0)) return kInf;
    r(j) = inst.w(j) / t(j);
  }
  const double m = r.maxCoeff();
  const double tau = alpha / m0;
  double accum = 0.0;
  Eigen::VectorXd e(inst.k);
  for (int j = 0; j < inst.k; ++j) {
    e(j) = std::exp(tau * (r(j) - m));
    accum += e(j);
  }
  if (weights) *weights = e / accum;
  return m + std::log(accum) / tau;
}

struct InnerState {
  Eigen::MatrixXcd u_mat;
  int iterations_used = 0;
};

// Minimizes the smoothed penalized objective over the unit-trace PSD set by
// monotone projected gradient with backtracking. Steps that would make some
// Tr(c_k c_k^H U) non-positive are rejected by the line search, so the
// iterates stay in the region where the objective is finite and convex.
void run_stage(const Instance& inst, const Eigen::MatrixXcd& penalty_matrix,
               double penalty_weight, double alpha, int budget,
               double move_tol, InnerState* state) {
  Eigen::MatrixXcd u_mat = state->u_mat;
  Eigen::VectorXd t = constraint_traces(inst, u_mat);
  const double m0 = std::max(max_ratio(inst, t),
                             std::numeric_limits<double>::min());
  if (!std::isfinite(m0)) return;

  Eigen::VectorXd weights;
  auto objective = [&](const Eigen::MatrixXcd& cand,
                       const Eigen::VectorXd& traces,
                       Eigen::VectorXd* soft) -> double {
    const double lse = smoothed_max(inst, traces, alpha, m0, soft);
    if (!std::isfinite(lse)) return kInf;
    return lse + penalty_weight * real_inner(penalty_matrix, cand);
  };

  double value = objective(u_mat, t, &weights);
  Eigen::MatrixXcd grad(inst.n, inst.n);
  double step = 0.0;
  int tiny_decrease_streak = 0;

  for (int it = 0; it < budget; ++it) {
    ++state->iterations_used;
    grad = penalty_weight * penalty_matrix;
    for (int j = 0; j < inst.k; ++j) {
      const double coeff = -weights(j) * inst.w(j) / (t(j) * t(j));
      grad += coeff * inst.outer_products[static_cast<std::size_t>(j)];
    }
    const double grad_norm = grad.norm();
    if (step <= 0.0) step = 1.0 / (grad_norm + 1e-300);

    // Backtracking with the standard proximal sufficient-decrease test.
    bool accepted = false;
    Eigen::MatrixXcd candidate;
    Eigen::VectorXd cand_t;
    double cand_value = kInf;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = project_unit_trace_psd(u_mat - step * grad);
      const Eigen::MatrixXcd diff = candidate - u_mat;
      const double move_sq = diff.squaredNorm();
      if (move_sq == 0.0) break;
      cand_t = constraint_traces(inst, candidate);
      Eigen::VectorXd cand_weights;
      cand_value = objective(candidate, cand_t, &cand_weights);
      const double model =
          value + real_inner(grad, diff) + move_sq / (2.0 * step);
      if (cand_value <= model) {
        accepted = true;
        weights = cand_weights;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const double decrease = value - cand_value;
    const double moved = (candidate - u_mat).norm();
    u_mat = candidate;
    t = cand_t;
    value = cand_value;
    step *= 1.3;

    if (moved <= move_tol) break;
    if (decrease <= 1e-16 * std::max(1.0, std::abs(value))) {
      if (++tiny_decrease_streak >= 3) break;
    } else {
      tiny_decrease_streak = 0;
    }
  }
  state->u_mat = u_mat;
}

std::pair<Eigen::MatrixXcd, double> inner_solve_impl(
    const Instance& inst, const Eigen::VectorXcd& sca_direction,
    double penalty_weight, const SolverOptions& opts,
    const Eigen::MatrixXcd* warm_start) {
  const int n = inst.n;
  if (n == 1) {
    Eigen::MatrixXcd u_mat = Eigen::MatrixXcd::Ones(1, 1);
    return {u_mat, max_ratio(inst, constraint_traces(inst, u_mat))};
  }

  InnerState state;
  state.u_mat = Eigen::MatrixXcd::Identity(n, n) / n;
  if (warm_start != nullptr && warm_start->rows() == n) {
    Eigen::MatrixXcd candidate = project_unit_trace_psd(*warm_start);
    // Blend toward I/n until every constraint trace is positive.
    for (int blend = 0; blend < 60; ++blend) {
      if (max_ratio(inst, constraint_traces(inst, candidate)) < kInf) {
        state.u_mat = candidate;
        break;
      }
      candidate = 0.5 * candidate + 0.5 * state.u_mat;
    }
  }

  const Eigen::MatrixXcd penalty_matrix =
      Eigen::MatrixXcd::Identity(n, n) -
      sca_direction * sca_direction.adjoint();

  // Sharpness schedule: the log-sum-exp gap to the true max shrinks as
  // scale * log(K) / alpha, so the last stage is accurate to ~1e-10.
  const double stages[] = {1e2, 1e4, 1e6, 1e8, 3e10};
  const int num_stages = static_cast<int>(sizeof(stages) / sizeof(stages[0]));
  const int per_stage = std::max(opts.max_inner / num_stages, 50);
  for (int si = 0; si < num_stages; ++si) {
    const double move_tol = (si + 1 == num_stages)
                                ? std::min(1e-13, opts.inner_grad_tol)
                                : 1e-12;
    const int remaining = opts.max_inner - state.iterations_used;
    if (remaining <= 0) break;
    run_stage(inst, penalty_matrix, penalty_weight, stages[si],
              std::min(per_stage, remaining), move_tol, &state);
  }

  const double objective =
      max_ratio(inst, constraint_traces(inst, state.u_mat));
  return {state.u_mat, objective};
}

}  // namespace

std::pair<Eigen::MatrixXcd, double> inner_convex_solve(
    const LiftedProblem& problem, const Eigen::VectorXcd& sca_direction,
    double penalty_weight, const SolverOptions& opts,
    const Eigen::MatrixXcd* warm_start) {
  validate(problem);
  if (sca_direction.size() != problem.dim()) {
    throw std::invalid_argument("inner_convex_solve: direction size mismatch");
  }
  const Instance inst = make_instance(problem);
  return inner_solve_impl(inst, sca_direction, penalty_weight, opts,
                          warm_start);
}

SolverResult solve(const LiftedProblem& problem, const SolverOptions& opts) {
  validate(problem);
  const Instance inst = make_instance(problem);
  const int n = inst.n;

  SolverResult result;
  if (n == 1) {
    result.x = Eigen::VectorXcd::Ones(1);
    result.value =
        max_ratio(inst, constraint_traces(inst, Eigen::MatrixXcd::Ones(1, 1)));
    result.trace.iterations.push_back({0, result.value, 0.0, 0.0, result.value});
    result.trace.converged = true;
    return result;
  }

  // Conditioning probe on the constraint Gram matrix.
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd weighted_gram = Eigen::MatrixXcd::Zero(n, n);
  for (int j = 0; j < inst.k; ++j) {
    gram += inst.outer_products[static_cast<std::size_t>(j)];
    weighted_gram +=
        inst.outer_products[static_cast<std::size_t>(j)] / inst.w(j);
  }
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) {
      result.trace.conditioning_warning = true;
    }
  }

  Eigen::MatrixXcd u_mat = Eigen::MatrixXcd::Identity(n, n) / n;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> init_eig(weighted_gram);
  Eigen::VectorXcd direction = init_eig.eigenvectors().col(n - 1);
  direction.normalize();

  double objective = max_ratio(inst, constraint_traces(inst, u_mat));
  double penalty_weight = opts.penalty_init_fraction * objective;
  double residual = 1.0 - 1.0 / n;
  result.trace.iterations.push_back(
      {0, objective, residual, penalty_weight,
       objective + penalty_weight * residual});

  auto linearized = [&](const Eigen::MatrixXcd& mat,
                        const Eigen::VectorXcd& dir, double weight) {
    const double pen =
        (mat.trace().real() - (dir.adjoint() * mat * dir)(0, 0).real());
    return max_ratio(inst, constraint_traces(inst, mat)) + weight * pen;
  };

  bool converged = false;
  double prev_residual = residual;
  double prev_objective = objective;
  for (int iter = 1; iter <= opts.max_outer; ++iter) {
    auto [u_next, obj_next] =
        inner_solve_impl(inst, direction, penalty_weight, opts, &u_mat);
    // SCA majorization guarantees descent of the penalized objective when the
    // subproblem is solved from the previous iterate; reject any numerical
    // ascent so the guarantee holds exactly.
    if (linearized(u_next, direction, penalty_weight) >
        linearized(u_mat, direction, penalty_weight)) {
      u_next = u_mat;
      obj_next = objective;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(u_next);
    const double top = eig.eigenvalues()(n - 1);
    residual = u_next.trace().real() - top;
    direction = eig.eigenvectors().col(n - 1);
    direction.normalize();
    u_mat = u_next;
    objective = obj_next;

    result.trace.iterations.push_back(
        {iter, objective, residual, penalty_weight,
         objective + penalty_weight * residual});

    const bool objective_settled =
        std::abs(objective - prev_objective) <=
        1e-7 * std::max(1.0, std::abs(objective));
    if (iter >= 2 && residual <= opts.residual_tol && objective_settled) {
      converged = true;
      break;
    }

    const double improvement = prev_residual - residual;
    if (improvement < opts.stall_threshold * std::max(prev_residual, 1e-300)) {
      penalty_weight *= opts.penalty_growth;
    }
    prev_residual = residual;
    prev_objective = objective;
  }

  result.trace.converged = converged;
  result.trace.final_penalty_weight = penalty_weight;
  if (!converged && residual > opts.residual_tol) {
    throw SolverError(
        "dc solve: rank-one residual " + std::to_string(residual) +
            " above tolerance after " + std::to_string(opts.max_outer) +
            " SCA iterations",
        result.trace);
  }
  result.trace.converged = true;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(u_mat);
  Eigen::VectorXcd x = eig.eigenvectors().col(n - 1);
  x.normalize();
  result.x = canonicalize_phase(std::move(x));
  double value = 0.0;
  for (int j = 0; j < inst.k; ++j) {
    const double gain = std::norm((problem.c.col(j).adjoint() * result.x)(0));
    value = std::max(value, inst.w(j) / gain);
  }
  result.value = value;
  return result;
}

void SolverTrace::write_csv(std::ostream& os) const {
  os << "iteration,objective,residual,penalty_weight\n";
  char line[160];
  for (const auto& it : iterations) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", it.iteration,
                  it.objective, it.residual, it.penalty_weight);
    os << line;
  }
}

}  // namespace airfl
