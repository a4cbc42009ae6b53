#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace airfl {

/// Max-min beam direction subproblem in lifted form:
///   minimize  max_k  w_k / |c_k^H x|^2   over unit-norm x in C^N.
/// After lifting X = x x^H the objective is max_k w_k / Tr(c_k c_k^H X)
/// over the unit-trace PSD set plus a rank-one constraint, which is handled
/// by a difference-of-convex penalty on Tr(X) - ||X||_2.
struct LiftedProblem {
  Eigen::MatrixXcd c;  // N x K, column k is constraint vector c_k (nonzero)
  Eigen::VectorXd w;   // K positive weights

  int dim() const { return static_cast<int>(c.rows()); }
  int num_constraints() const { return static_cast<int>(c.cols()); }
};

struct SolverOptions {
  double residual_tol = 1e-6;      // rank-one residual Tr(U) - ||U|| at exit
  double inner_grad_tol = 1e-8;    // projected-gradient stationarity, relative
  int max_outer = 20;              // SCA iterations
  int max_inner = 5000;            // projected-gradient iterations per SCA step
  double penalty_init_fraction = 0.01;  // initial penalty weight as a fraction
                                        // of the starting objective
  double penalty_growth = 5.0;     // multiplier applied when progress stalls
  double stall_threshold = 0.3;    // relative residual improvement below which
                                   // the penalty weight is increased
};

struct SolverIterate {
  int iteration = 0;
  double objective = 0.0;  // max_k w_k / Tr(c_k c_k^H U)
  double residual = 0.0;   // Tr(U) - ||U||_2, >= 0 for PSD U
  double penalty_weight = 0.0;
  double penalized = 0.0;  // objective + penalty_weight * residual
};

struct SolverTrace {
  std::vector<SolverIterate> iterations;
  bool converged = false;
  double final_penalty_weight = 0.0;
  bool conditioning_warning = false;  // constraint Gram condition > 1e12

  int iteration_count() const { return static_cast<int>(iterations.size()); }
  /// CSV rows "iteration,objective,residual,penalty_weight" with header.
  void write_csv(std::ostream& os) const;
};

struct SolverResult {
  Eigen::VectorXcd x;   // unit-norm, first significant coordinate real >= 0
  double value = 0.0;   // max_k w_k / |c_k^H x|^2
  SolverTrace trace;
};

/// Thrown when the SCA loop exhausts its iteration budget with the rank-one
/// residual still above tolerance. Carries the trace for diagnosis.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverTrace trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const SolverTrace& trace() const { return trace_; }

 private:
  SolverTrace trace_;
};

/// One convex SCA subproblem: with the spectral norm linearized around the
/// direction `sca_direction` (unit norm), solves
///   min  max_k w_k / Tr(c_k c_k^H U) + penalty_weight * Tr((I - dir dir^H) U)
/// over the unit-trace PSD set, by projected gradient descent on a
/// log-sum-exp smoothing of the max with a sharpness schedule.
/// Returns the optimal U and its (unsmoothed) max objective.
/// `warm_start` optionally seeds the iteration; defaults to I/N.
std::pair<Eigen::MatrixXcd, double> inner_convex_solve(
    const LiftedProblem& problem, const Eigen::VectorXcd& sca_direction,
    double penalty_weight, const SolverOptions& opts = {},
    const Eigen::MatrixXcd* warm_start = nullptr);

/// Full solve: matrix lifting + DC penalty + SCA, then principal-eigenvector
/// extraction. Throws SolverError on non-convergence.
SolverResult solve(const LiftedProblem& problem, const SolverOptions& opts = {});

/// Projection onto the unit-trace PSD set (eigendecomposition followed by
/// simplex projection of the eigenvalues). Exposed for tests.
Eigen::MatrixXcd project_unit_trace_psd(const Eigen::MatrixXcd& hermitian);

/// Rotates x so its first coordinate with |x_i| > 1e-9 * max|x| is real and
/// nonnegative. The objective only sees |c^H x|, so this is a pure
/// normalization for reproducibility.
Eigen::VectorXcd canonicalize_phase(Eigen::VectorXcd x);

}  // namespace airfl
