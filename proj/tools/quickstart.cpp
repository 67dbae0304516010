// Minimal library usage: constants, a concentration profile and the solver.

#include <iostream>

#include "tmlab/certify.hpp"

int main() {
  using namespace tmlab;
  const auto P = make_params(2);
  std::cout << "mu_N = " << fmt17(P.mu_N) << "\n";
  std::cout << "concentration upper = " << fmt17(concentration_upper(P)) << "\n";

  const auto v = conc_family(1e-4, P);
  std::cout << "norm(v_eps) = " << fmt17(x1_norm(v, P)) << "\n";
  std::cout << "F_0(v_eps) = " << fmt17(tm_integral(v, PerturbationSpec::zero(), P.mu_N, P).value) << "\n";

  const auto f = PerturbationSpec::power(1.0, 1.0, 1.0);
  const auto sol = solve_extremal(f, P, SolverOptions{});
  std::cout << "extremal: " << to_string(sol.status) << ", F = " << fmt17(sol.functional_value)
            << ", lambda = " << fmt17(sol.lambda) << "\n";
  return sol.converged() ? 0 : 1;
}
