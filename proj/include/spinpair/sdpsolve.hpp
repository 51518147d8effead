#pragma once

// Maximizes the sharpness λ subject to PSD effects and the affine constraints
// of a ConstraintSystem. λ enters linearly, so each fixed-λ slice is a convex
// feasibility problem; it is decided by Dykstra alternating projections
// between the affine subspace and the product of PSD cones, and λ is found by
// bisection.

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "spinpair/compat.hpp"
#include "spinpair/matcore.hpp"

namespace spinpair {

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double polish_tol = 1e-11;
  double bisection_width = 5e-4;
  int polish_steps = 3;
  long max_iterations = 200000;
  int stagnation_window = 500;
  double stagnation_rel = 1e-12;
  double rank_tol = 1e-10;  // relative singular-value cutoff for the projector
  int certificate_every = 100;  // iterations between dual-certificate attempts
};

enum class SdpStatus { Optimal, FeasibleOnly, Infeasible, MaxIterations };

inline std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::FeasibleOnly: return "feasible-only";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::MaxIterations: return "max-iterations";
  }
  return "unknown";
}

enum class Verdict { Feasible, Infeasible, Undecided };

struct FeasibilityResult {
  Verdict verdict = Verdict::Undecided;
  double lambda = 0.0;
  std::vector<Operator> effects;  // last PSD iterate
  double residual = 0.0;          // ‖A x − b(λ)‖₂ at that iterate
  long iterations = 0;
  bool certified = false;  // infeasibility proven by a dual vector, not by stagnation

  bool feasible() const { return verdict == Verdict::Feasible; }
};

struct BisectionStep {
  double lambda = 0.0;
  bool feasible = false;
  long iterations = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool certified = false;
};

struct SdpSolution {
  double lambda_opt = 0.0;
  double lambda_upper = 1.0;  // smallest λ found infeasible (1 if none)
  std::vector<Operator> effects;
  double primal_residual = 0.0;
  double psd_violation = 0.0;  // min eigenvalue over effects
  long iterations = 0;
  SdpStatus status = SdpStatus::Infeasible;
  std::vector<BisectionStep> trace;
};

/// Feasibility oracle for one constraint system; the affine projector is
/// computed once.
class FeasibilityOracle {
 public:
  explicit FeasibilityOracle(const ConstraintSystem& cs, SolverOptions opts = {})
      : cs_(cs), opts_(opts), n_(hermitian_param_size(cs.effect_dim)) {
    const Eigen::Index rows = static_cast<Eigen::Index>(cs.constraints.size());
    const Eigen::Index cols = cs.num_variables();
    a_.resize(rows, cols);
    b0_.resize(rows);
    b1_.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& c = cs.constraints[static_cast<std::size_t>(i)];
      for (Eigen::Index k = 0; k < cols; ++k) a_(i, k) = c.coeffs[static_cast<std::size_t>(k)];
      b0_(i) = c.target;
      b1_(i) = c.lambda_coeff;
    }
    // Rank-revealing pseudoinverse; redundant rows are absorbed here.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a_, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cutoff = opts_.rank_tol * (sv.size() ? sv(0) : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    rank_ = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
      if (sv(k) > cutoff) {
        inv(k) = 1.0 / sv(k);
        ++rank_;
      }
    pinv_ = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    projector_ = Eigen::MatrixXd::Identity(cols, cols) - pinv_ * a_;
  }

  const ConstraintSystem& system() const { return cs_; }
  Eigen::Index rank() const { return rank_; }

  FeasibilityResult check(double lambda, double tol) const {
    const Eigen::VectorXd b = b0_ + lambda * b1_;
    const Eigen::VectorXd shift = pinv_ * b;
    const int ne = cs_.num_effects;
    const int d = cs_.effect_dim;

    // Start from the uninformative POVM 1/N, feasible at λ = 0.
    Eigen::VectorXd x(cs_.num_variables());
    const Eigen::VectorXd uniform = hermitian_to_real(ComplexMatrix::Identity(d, d) / double(ne));
    for (int e = 0; e < ne; ++e) x.segment(e * n_, n_) = uniform;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(x.size());  // Dykstra correction for the cone
    Eigen::VectorXd y(x.size()), z(x.size());

    FeasibilityResult res;
    res.lambda = lambda;
    std::deque<double> history;
    for (long it = 1; it <= opts_.max_iterations; ++it) {
      // The affine set needs no correction term: its increments lie in the
      // row space and are annihilated by the next projection.
      y.noalias() = projector_ * x;
      y += shift;
      z = y + q;
      for (int e = 0; e < ne; ++e) x.segment(e * n_, n_) = project_psd(z.segment(e * n_, n_), d);
      q = z - x;

      const double r = (a_ * x - b).norm();
      res.iterations = it;
      res.residual = r;
      if (r < tol) {
        res.verdict = Verdict::Feasible;
        break;
      }
      if (opts_.certificate_every > 0 && it % opts_.certificate_every == 0 && separates(x - y, b)) {
        res.verdict = Verdict::Infeasible;
        res.certified = true;
        break;
      }
      history.push_back(r);
      if (static_cast<int>(history.size()) > opts_.stagnation_window) {
        const double old = history.front();
        history.pop_front();
        if (old - r < opts_.stagnation_rel * old) {
          res.verdict = Verdict::Infeasible;
          break;
        }
      }
    }
    res.effects.reserve(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e) res.effects.emplace_back(real_to_hermitian(x.segment(e * n_, n_), d));
    return res;
  }

  FeasibilityResult check(double lambda) const { return check(lambda, opts_.feasibility_tol); }

 private:
  // Dual certificate: u with Aᵀu = w blockwise PSD up to ε and bᵀu < −ε·d.
  // Any feasible x has Σ Tr x_e = d, so bᵀu = ⟨w, x⟩ ≥ −ε·d, a contradiction.
  // The candidate w is the gap x − y pushed into the row space of A.
  bool separates(const Eigen::VectorXd& gap, const Eigen::VectorXd& b) const {
    const Eigen::VectorXd w = gap - projector_ * gap;
    const double scale = w.norm();
    if (scale == 0.0) return false;
    const Eigen::VectorXd u = pinv_.transpose() * w;
    double eps = 0.0;
    for (int e = 0; e < cs_.num_effects; ++e)
      eps = std::max(eps, -min_eigenvalue(Operator(real_to_hermitian(w.segment(e * n_, n_), cs_.effect_dim))));
    return b.dot(u) < -eps * cs_.effect_dim - 1e-12 * scale * u.norm();
  }

  static Eigen::VectorXd project_psd(const Eigen::Ref<const Eigen::VectorXd>& v, int d) {
    const ComplexMatrix h = real_to_hermitian(v, d);
    const HermitianEig eig = hermitian_eig(h, 1e-6);
    if (eig.values(0) >= 0.0) return v;
    const Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
    const ComplexMatrix out = eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint();
    return hermitian_to_real(out);
  }

  ConstraintSystem cs_;
  SolverOptions opts_;
  int n_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd b0_, b1_;
  Eigen::MatrixXd pinv_, projector_;
  Eigen::Index rank_ = 0;
};

inline FeasibilityResult feasible_at(const ConstraintSystem& cs, double lambda, SolverOptions opts = {}) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("feasible_at: λ must lie in [0, 1]");
  return FeasibilityOracle(cs, opts).check(lambda);
}

namespace detail {

inline double min_effect_eigenvalue(const std::vector<Operator>& effects) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& e : effects) m = std::min(m, min_eigenvalue(e));
  return m;
}

}  // namespace detail

/// Bisection on λ ∈ [0, 1] down to `bisection_width`, then `polish_steps`
/// further halvings at the tighter tolerance. Returns the largest λ decided
/// feasible together with its effects.
inline SdpSolution solve_max_sharpness(const ConstraintSystem& cs, SolverOptions opts = {}) {
  const FeasibilityOracle oracle(cs, opts);
  SdpSolution sol;
  FeasibilityResult best;
  bool undecided = false;

  auto query = [&](double lambda, double tol) {
    FeasibilityResult r = oracle.check(lambda, tol);
    sol.iterations += r.iterations;
    sol.trace.push_back({lambda, r.feasible(), r.iterations, r.residual, tol, r.certified});
    if (r.verdict == Verdict::Undecided) undecided = true;
    return r;
  };

  FeasibilityResult at_zero = query(0.0, opts.feasibility_tol);
  if (!at_zero.feasible()) {
    sol.status = at_zero.verdict == Verdict::Undecided ? SdpStatus::MaxIterations : SdpStatus::Infeasible;
    sol.effects = at_zero.effects;
    sol.primal_residual = at_zero.residual;
    sol.psd_violation = detail::min_effect_eigenvalue(at_zero.effects);
    sol.lambda_opt = 0.0;
    sol.lambda_upper = 0.0;
    return sol;
  }
  best = at_zero;

  double lo = 0.0, hi = 1.0;
  FeasibilityResult at_one = query(1.0, opts.feasibility_tol);
  if (at_one.feasible()) {
    best = at_one;
    lo = hi = 1.0;
  } else {
    while (hi - lo > opts.bisection_width) {
      const double mid = 0.5 * (lo + hi);
      FeasibilityResult r = query(mid, opts.feasibility_tol);
      if (r.feasible()) {
        lo = mid;
        best = std::move(r);
      } else {
        hi = mid;
      }
    }
    for (int k = 0; k < opts.polish_steps; ++k) {
      const double mid = 0.5 * (lo + hi);
      FeasibilityResult r = query(mid, opts.polish_tol);
      if (r.feasible()) {
        lo = mid;
        best = std::move(r);
      } else {
        hi = mid;
      }
    }
  }

  sol.lambda_opt = lo;
  sol.lambda_upper = hi;
  sol.effects = best.effects;
  sol.primal_residual = constraint_residuals(cs, best.effects, lo).norm();
  sol.psd_violation = detail::min_effect_eigenvalue(best.effects);
  sol.status = undecided ? SdpStatus::FeasibleOnly : SdpStatus::Optimal;
  return sol;
}

/// Feasible λ values must all lie below every infeasible one.
inline bool trace_is_monotone(const std::vector<BisectionStep>& trace) {
  double max_feasible = -1.0;
  double min_infeasible = 2.0;
  for (const auto& s : trace) {
    if (s.feasible) max_feasible = std::max(max_feasible, s.lambda);
    else min_infeasible = std::min(min_infeasible, s.lambda);
  }
  return max_feasible < min_infeasible;
}

inline void to_json(nlohmann::json& j, const BisectionStep& s) {
  j = nlohmann::json{{"lambda", s.lambda},
                     {"feasible", s.feasible},
                     {"iterations", s.iterations},
                     {"residual", s.residual},
                     {"tolerance", s.tolerance},
                     {"certified", s.certified}};
}

inline void to_json(nlohmann::json& j, const SdpSolution& s) {
  j = nlohmann::json{{"lambda_opt", s.lambda_opt},
                     {"lambda_upper", s.lambda_upper},
                     {"effects", s.effects},
                     {"primal_residual", s.primal_residual},
                     {"psd_violation", s.psd_violation},
                     {"iterations", s.iterations},
                     {"status", to_string(s.status)},
                     {"trace", s.trace}};
}

}  // namespace spinpair
