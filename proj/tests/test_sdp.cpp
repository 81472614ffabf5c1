#include "nfisac/sdp.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nfisac/rng.hpp"

using namespace nfisac;

TEST_CASE("min tr(X) s.t. X >= I") {
  SdpProblem p;
  const int x = p.add_psd_block("x", 3, false);
  p.add_objective(x, MatC::Identity(3, 3));
  // X - S = I entrywise with S >= 0
  const int s = p.add_psd_block("s", 3, false);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      MatC e = MatC::Zero(3, 3);
      e(i, j) = e(j, i) = (i == j) ? 1.0 : 0.5;
      p.add_constraint({{x, e}, {s, MatC(-e)}}, SdpProblem::Rel::EQ, i == j ? 1.0 : 0.0);
    }
  const SolveReport rep = p.solve(1e-8);
  CHECK(rep.status == SolveStatus::OPTIMAL);
  CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-6));
  CHECK((p.psd_value(x) - MatC::Identity(3, 3)).norm() < 1e-5);
  CHECK(rep.duality_gap <= 1e-6 * (1 + std::abs(rep.objective)));
}

TEST_CASE("Schur epigraph of tr(U^{-1}) with fixed U = diag(2,4)") {
  SdpProblem p;
  const int g = p.tr_inverse_epigraph(2);
  p.pin_entry(g, 2, 2, 2.0);
  p.pin_entry(g, 3, 3, 4.0);
  p.pin_entry(g, 2, 3, 0.0);
  const SolveReport rep = p.solve(1e-8);
  CHECK(rep.status == SolveStatus::OPTIMAL);
  CHECK(rep.objective == doctest::Approx(0.75).epsilon(1e-6));
  const MatC gv = p.psd_value(g);
  CHECK(gv(0, 0).real() == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(gv(1, 1).real() == doctest::Approx(0.25).epsilon(1e-5));
  // optimal W is symmetric PSD
  CHECK(std::abs(gv(0, 1) - std::conj(gv(1, 0))) < 1e-7);
}

TEST_CASE("epigraph with identity U gives tr(W) = dim") {
  SdpProblem p;
  const int g = p.tr_inverse_epigraph(3);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) p.pin_entry(g, 3 + i, 3 + j, i == j ? 1.0 : 0.0);
  const SolveReport rep = p.solve(1e-8);
  CHECK(rep.status == SolveStatus::OPTIMAL);
  CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("infeasible LMI is detected") {
  SdpProblem p;
  const int x = p.add_psd_block("x", 2, false);
  p.add_objective(x, MatC::Identity(2, 2));
  const int s = p.add_psd_block("s", 2, false);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      MatC e = MatC::Zero(2, 2);
      e(i, j) = e(j, i) = (i == j) ? 1.0 : 0.5;
      p.add_constraint({{x, e}, {s, MatC(-e)}}, SdpProblem::Rel::EQ, i == j ? 1.0 : 0.0);
    }
  p.add_constraint({{x, MatC::Identity(2, 2)}}, SdpProblem::Rel::LE, 1.0);
  const SolveReport rep = p.solve(1e-8);
  CHECK(rep.status == SolveStatus::INFEASIBLE);
  CHECK(rep.certificate_norm > 0.0);
}

TEST_CASE("complex Hermitian blocks round-trip through the embedding") {
  // min tr(X) s.t. Re tr(A X) = 1 with A = aa^H for a fixed complex a;
  // optimum X = aa^H/|a|^4 * ... : tr(X) = 1/lambda_max(A) = 1/|a|^2.
  Rng rng(5);
  const int n = 4;
  VecC a(n);
  for (int i = 0; i < n; ++i) a(i) = rng.cnormal();
  SdpProblem p;
  const int x = p.add_psd_block("x", n, true);
  p.add_objective(x, MatC::Identity(n, n));
  p.add_constraint({{x, MatC(a * a.adjoint())}}, SdpProblem::Rel::EQ, 1.0);
  const SolveReport rep = p.solve(1e-9);
  CHECK(rep.status == SolveStatus::OPTIMAL);
  CHECK(rep.objective == doctest::Approx(1.0 / a.squaredNorm()).epsilon(1e-6));
  const MatC xv = p.psd_value(x);
  CHECK((xv - xv.adjoint()).norm() < 1e-9);
  CHECK((a.adjoint() * xv * a).value().real() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("inequalities, free variables and duality bookkeeping") {
  // min c^T v s.t. v1 + v2 = 1, tr(X) + v1 <= 2, X >= 0  (v free)
  SdpProblem p;
  const int x = p.add_psd_block("x", 2, false);
  const int v1 = p.add_free_var("v1");
  const int v2 = p.add_free_var("v2");
  p.add_objective_free(v1, 1.0);
  p.add_objective_free(v2, 2.0);
  p.add_objective(x, MatC::Identity(2, 2));
  p.add_constraint({}, {{v1, 1.0}, {v2, 1.0}}, SdpProblem::Rel::EQ, 1.0);
  p.add_constraint({{x, MatC::Identity(2, 2)}}, {{v1, 1.0}}, SdpProblem::Rel::LE, 2.0);
  const SolveReport rep = p.solve(1e-9);
  CHECK(rep.status == SolveStatus::OPTIMAL);
  // objective = v1 + 2(1 - v1) = 2 - v1, and v1 <= 2 since tr(X) >= 0:
  // optimum at v1 = 2, v2 = -1, X = 0
  CHECK(rep.objective == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(p.free_value(v1) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(p.free_value(v2) == doctest::Approx(-1.0).epsilon(1e-5));
  // weak duality in every report
  CHECK(rep.objective >= rep.dual_objective - 1e-7 * (1 + std::abs(rep.objective)));
}

TEST_CASE("random feasible SDPs satisfy KKT at tolerance") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + int(trial % 3);
    const int m = 2 + int(trial % 2);
    // build a strictly feasible primal/dual pair, then check objective match
    MatC x0 = MatC::Zero(n, n);
    for (int i = 0; i < n; ++i) x0(i, i) = rng.uniform(0.5, 2.0);
    SdpProblem p;
    const int x = p.add_psd_block("x", n, false);
    MatC c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) c(i, j) = rng.uniform(-1, 1);
    c = 0.5 * (c + c.adjoint().eval());
    c += double(n) * MatC::Identity(n, n);  // keep bounded below
    p.add_objective(x, c);
    for (int i = 0; i < m; ++i) {
      MatC a(n, n);
      for (int r = 0; r < n; ++r)
        for (int cc = 0; cc < n; ++cc) a(r, cc) = rng.uniform(-1, 1);
      a = 0.5 * (a + a.adjoint().eval());
      const double rhs = (a * x0).trace().real();
      p.add_constraint({{x, a}}, SdpProblem::Rel::EQ, rhs);
    }
    const SolveReport rep = p.solve(1e-8);
    CHECK(rep.status == SolveStatus::OPTIMAL);
    CHECK(rep.primal_residual <= 1e-7);
    CHECK(rep.dual_residual <= 1e-7);
    CHECK(rep.objective >= rep.dual_objective - 1e-6 * (1 + std::abs(rep.objective)));
  }
}

TEST_CASE("solves are deterministic") {
  auto build_and_solve = [] {
    SdpProblem p;
    const int g = p.tr_inverse_epigraph(2);
    p.pin_entry(g, 2, 2, 3.0);
    p.pin_entry(g, 3, 3, 5.0);
    p.pin_entry(g, 2, 3, 0.5);
    p.solve(1e-9);
    return p.psd_value(g);
  };
  const MatC a = build_and_solve();
  const MatC b = build_and_solve();
  CHECK((a - b).norm() == 0.0);  // bit-identical
}

TEST_CASE("problem dump is self-describing") {
  SdpProblem p;
  const int x = p.add_psd_block("x", 2, false);
  p.add_constraint({{x, MatC::Identity(2, 2)}}, SdpProblem::Rel::LE, 1.0);
  std::ostringstream os;
  p.dump(os);
  CHECK(os.str().find("block x dim 2") != std::string::npos);
  CHECK(os.str().find("1 constraints") != std::string::npos);
}
