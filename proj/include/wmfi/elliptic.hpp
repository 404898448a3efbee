#pragma once

#include <stdexcept>
#include <vector>

#include "wmfi/grid.hpp"

namespace wmfi {

enum class EllipticMethod { PCG_FFT, SOR };

struct EllipticOptions {
  double rel_tol = 1e-10;
  /// 0 selects the default cap 10 * max(nx, ny).
  int max_iter = 0;
  EllipticMethod method = EllipticMethod::PCG_FFT;

  void validate() const;
  int iteration_cap(const GridSpec& g) const;
};

class NonPositiveDensity : public std::domain_error {
 public:
  NonPositiveDensity() : std::domain_error("non-positive density") {}
};

/// Raised when the iteration cap is hit before the residual target.
class EllipticNotConverged : public std::runtime_error {
 public:
  EllipticNotConverged(int iterations, double residual);
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

struct EllipticSolution {
  Field psi;
  /// ||A psi - q||_2 / ||q||_2 over the interior rows (0 when q = 0).
  double relative_residual = 0.0;
  int iterations = 0;
  /// Relative residual after each iteration, starting with the initial guess.
  std::vector<double> residual_history;
};

/// Discrete div(rho grad psi): symmetric five-point flux stencil with
/// arithmetic face averages of rho. Defined on interior rows; wall rows are 0.
Field flux_divergence(const Field& rho, const Field& psi);

/// Solves laplacian(psi) = q on the interior rows with psi = 0 on both walls,
/// by a real FFT in x and a tridiagonal solve per wavenumber in y. The result is
/// exact to round-off for the five-point operator and carries DirichletY.
Field solve_poisson_const(const Field& q);

/// Solves flux_divergence(rho, psi) = q with psi = 0 on the walls.
Field solve_poisson_variable(const Field& rho, const Field& q, const EllipticOptions& opts = {});
EllipticSolution solve_poisson_variable_detailed(const Field& rho, const Field& q,
                                                 const EllipticOptions& opts = {});

}  // namespace wmfi
