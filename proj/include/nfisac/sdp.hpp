#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nfisac/types.hpp"

namespace nfisac {

enum class SolveStatus { OPTIMAL, INFEASIBLE, UNBOUNDED, MAX_ITER };

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::MAX_ITER;
  double objective = 0.0;       // primal objective (minimization)
  double dual_objective = 0.0;
  double duality_gap = 0.0;     // |primal - dual|
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double certificate_norm = 0.0;  // infeasibility certificate magnitude
};

/// Semidefinite program over a product of PSD matrix blocks plus free
/// scalars:
///
///   minimize    sum_k Re tr(C_k X_k) + c_f^T v
///   subject to  sum_k Re tr(A_ik X_k) + f_i^T v  (=, <=, >=)  b_i
///               X_k >= 0 (Hermitian PSD or real symmetric PSD), v free.
///
/// Complex Hermitian blocks are lowered to the standard 2n x 2n
/// real-symmetric embedding before the solve; the recovered complex matrix
/// is returned by psd_value(). Inequalities receive internal nonnegative
/// slacks. The solver is a Nesterov-Todd primal-dual interior-point method
/// with a Mehrotra corrector; solutions are deterministic functions of the
/// input.
class SdpProblem {
 public:
  enum class Rel { EQ, LE, GE };

  struct Term {
    int block;
    MatC coeff;  // Hermitian (or real symmetric) coefficient
  };

  int add_psd_block(const std::string& name, int dim, bool complex_hermitian = true);
  int add_free_var(const std::string& name);

  void add_objective(int block, const MatC& c);
  void add_objective_free(int var, double coeff);

  void add_constraint(std::vector<Term> terms, std::vector<std::pair<int, double>> free_terms,
                      Rel rel, double rhs);
  void add_constraint(std::vector<Term> terms, Rel rel, double rhs) {
    add_constraint(std::move(terms), {}, rel, rhs);
  }

  /// Pin a single entry of a block: Re part (and Im part when the block is
  /// complex and p != q) equal to the given value.
  void pin_entry(int block, int p, int q, cplx value);

  /// Epigraph of tr(U^{-1}) via the Schur complement: adds a PSD block
  ///   G = [ W  I ]
  ///       [ I  U ]  >= 0
  /// with the off-diagonal pinned to the identity and tr(W) added to the
  /// objective. Rows/cols [0, u_dim) of G hold W, [u_dim, 2 u_dim) hold U.
  /// At the optimum W = U^{-1}. Returns the block id.
  int tr_inverse_epigraph(int u_dim, bool complex_hermitian = false);

  SolveReport solve(double tol = 1e-8, int max_iter = 200);

  /// Recovered block value after solve(); Hermitian for complex blocks.
  MatC psd_value(int block) const;
  double free_value(int var) const;
  /// Dual variable of constraint i (order of insertion).
  double dual_value(int i) const;

  int num_constraints() const { return static_cast<int>(cons_.size()); }

  /// Self-describing text dump for debugging (not a stable format).
  void dump(std::ostream& os) const;

 private:
  struct Block {
    std::string name;
    int dim;
    bool complex_herm;
  };
  struct Constraint {
    std::vector<Term> terms;
    std::vector<std::pair<int, double>> free_terms;
    Rel rel;
    double rhs;
  };

  std::vector<Block> blocks_;
  std::vector<std::string> free_names_;
  std::vector<std::pair<int, MatC>> objective_;  // per-block accumulators
  std::vector<double> objective_free_;
  std::vector<Constraint> cons_;

  // solution state
  std::vector<MatR> sol_blocks_;  // embedded real solutions incl. slacks
  VecR sol_free_;
  VecR sol_dual_;
  bool solved_ = false;

  friend struct SdpLowering;
};

}  // namespace nfisac
