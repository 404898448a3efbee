#include "wmfi/elliptic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

namespace wmfi {

void EllipticOptions::validate() const {
  if (!(rel_tol > 0.0) || rel_tol > 1e-4) throw std::invalid_argument("elliptic: rel_tol must lie in (0, 1e-4]");
  if (max_iter < 0) throw std::invalid_argument("elliptic: max_iter must be >= 1 (or 0 for the default)");
}

int EllipticOptions::iteration_cap(const GridSpec& g) const {
  return max_iter > 0 ? max_iter : 10 * std::max(g.nx, g.ny);
}

EllipticNotConverged::EllipticNotConverged(int iterations, double residual)
    : std::runtime_error("elliptic solve did not converge after " + std::to_string(iterations) +
                         " iterations (relative residual " + std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

namespace {

// FFT-in-x / Thomas-in-y solver for the constant-coefficient five-point
// Laplacian. One instance per grid; FFTW plans are created under a lock and
// executed through the thread-safe new-array interface.
class FastPoisson {
 public:
  explicit FastPoisson(const GridSpec& g) : g_(g), modes_(g.nx / 2 + 1), rows_(g.ny - 2) {
    std::vector<double> in(static_cast<std::size_t>(g.nx));
    std::vector<fftw_complex> out(static_cast<std::size_t>(modes_));
    {
      std::lock_guard lock(planner_mutex());
      fwd_ = fftw_plan_dft_r2c_1d(g.nx, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
      inv_ = fftw_plan_dft_c2r_1d(g.nx, out.data(), in.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    const double iy2 = 1.0 / (g.dy() * g.dy());
    const double ix2 = 1.0 / (g.dx() * g.dx());
    cprime_.assign(static_cast<std::size_t>(modes_ * rows_), 0.0);
    inv_denom_.assign(static_cast<std::size_t>(modes_ * rows_), 0.0);
    for (int m = 0; m < modes_; ++m) {
      const double s = std::sin(std::numbers::pi * m / g.nx);
      const double diag = -2.0 * iy2 - 4.0 * ix2 * s * s;
      double cp = 0.0;
      for (int r = 0; r < rows_; ++r) {
        const double denom = diag - iy2 * cp;
        const double inv = 1.0 / denom;
        cp = iy2 * inv;
        cprime_[idx(m, r)] = cp;
        inv_denom_[idx(m, r)] = inv;
      }
    }
  }

  ~FastPoisson() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  FastPoisson(const FastPoisson&) = delete;
  FastPoisson& operator=(const FastPoisson&) = delete;

  Field solve(const Field& q) const {
    const int nx = g_.nx;
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(modes_ * rows_));
    std::vector<double> row(static_cast<std::size_t>(nx));
    for (int r = 0; r < rows_; ++r) {
      for (int i = 0; i < nx; ++i) row[static_cast<std::size_t>(i)] = q(i, r + 1);
      fftw_execute_dft_r2c(fwd_, row.data(), reinterpret_cast<fftw_complex*>(&hat[static_cast<std::size_t>(r * modes_)]));
    }
    // Thomas sweep per mode; hat is stored row-major (row, mode).
    const double iy2 = 1.0 / (g_.dy() * g_.dy());
    for (int m = 0; m < modes_; ++m) {
      std::complex<double> prev{0.0, 0.0};
      for (int r = 0; r < rows_; ++r) {
        auto& h = hat[static_cast<std::size_t>(r * modes_ + m)];
        h = (h - iy2 * prev) * inv_denom_[idx(m, r)];
        prev = h;
      }
      for (int r = rows_ - 2; r >= 0; --r) {
        auto& h = hat[static_cast<std::size_t>(r * modes_ + m)];
        h -= cprime_[idx(m, r)] * hat[static_cast<std::size_t>((r + 1) * modes_ + m)];
      }
    }
    Field psi(g_, BcClass::PeriodicX_DirichletY);
    const double norm = 1.0 / nx;
    for (int r = 0; r < rows_; ++r) {
      fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(&hat[static_cast<std::size_t>(r * modes_)]),
                           row.data());
      for (int i = 0; i < nx; ++i) psi(i, r + 1) = row[static_cast<std::size_t>(i)] * norm;
    }
    return psi;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  std::size_t idx(int m, int r) const { return static_cast<std::size_t>(m * rows_ + r); }

  GridSpec g_;
  int modes_;
  int rows_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
  std::vector<double> cprime_;
  std::vector<double> inv_denom_;
};

const FastPoisson& fast_poisson_for(const GridSpec& g) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, double, double>, std::unique_ptr<FastPoisson>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{g.nx, g.ny, g.Lx, g.Ly}];
  if (!slot) slot = std::make_unique<FastPoisson>(g);
  return *slot;
}

// Interior-row dot product with a fixed summation order.
double dot_interior(const Field& a, const Field& b) {
  const GridSpec& g = a.grid();
  double total = 0.0;
  for (int j = 1; j < g.ny - 1; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) row += a(i, j) * b(i, j);
    total += row;
  }
  return total;
}

void zero_walls(Field& f) {
  const GridSpec& g = f.grid();
  for (int i = 0; i < g.nx; ++i) {
    f(i, 0) = 0.0;
    f(i, g.ny - 1) = 0.0;
  }
}

double mean_density(const Field& rho) { return integrate(rho) / (rho.grid().Lx * rho.grid().Ly); }

EllipticSolution solve_pcg(const Field& rho, const Field& q, const EllipticOptions& opts) {
  const GridSpec& g = q.grid();
  EllipticSolution sol;
  Field rhs = q;
  zero_walls(rhs);
  const double qnorm = std::sqrt(dot_interior(rhs, rhs));
  if (qnorm == 0.0) {
    sol.psi = Field(g, BcClass::PeriodicX_DirichletY);
    sol.residual_history.push_back(0.0);
    return sol;
  }
  const double inv_mean = 1.0 / mean_density(rho);
  const FastPoisson& fast = fast_poisson_for(g);
  auto precondition = [&](const Field& r) {
    Field z = fast.solve(r);
    z *= inv_mean;
    return z;
  };

  Field psi = precondition(rhs);
  Field r = rhs;
  r -= flux_divergence(rho, psi);
  zero_walls(r);
  double rel = std::sqrt(dot_interior(r, r)) / qnorm;
  sol.residual_history.push_back(rel);
  Field z = precondition(r);
  Field p = z;
  double rz = dot_interior(r, z);
  const int cap = opts.iteration_cap(g);
  int it = 0;
  while (rel > opts.rel_tol) {
    if (it >= cap) throw EllipticNotConverged(it, rel);
    Field ap = flux_divergence(rho, p);
    const double alpha = rz / dot_interior(p, ap);
    psi.axpy(alpha, p);
    r.axpy(-alpha, ap);
    rel = std::sqrt(dot_interior(r, r)) / qnorm;
    sol.residual_history.push_back(rel);
    ++it;
    if (rel <= opts.rel_tol) break;
    z = precondition(r);
    const double rz_new = dot_interior(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < p.size(); ++k) p.values()[k] = z.values()[k] + beta * p.values()[k];
  }
  // Report the true residual rather than the recursively updated one.
  Field check = rhs;
  check -= flux_divergence(rho, psi);
  zero_walls(check);
  sol.relative_residual = std::sqrt(dot_interior(check, check)) / qnorm;
  sol.iterations = it;
  zero_walls(psi);
  psi.set_bc(BcClass::PeriodicX_DirichletY);
  sol.psi = std::move(psi);
  return sol;
}

// Red-black successive over-relaxation on the flux stencil.
EllipticSolution solve_sor(const Field& rho, const Field& q, const EllipticOptions& opts) {
  const GridSpec& g = q.grid();
  EllipticSolution sol;
  Field rhs = q;
  zero_walls(rhs);
  const double qnorm = std::sqrt(dot_interior(rhs, rhs));
  Field psi(g, BcClass::PeriodicX_DirichletY);
  if (qnorm == 0.0) {
    sol.psi = psi;
    sol.residual_history.push_back(0.0);
    return sol;
  }
  const double ix2 = 1.0 / (g.dx() * g.dx());
  const double iy2 = 1.0 / (g.dy() * g.dy());
  const double h = std::max(g.dx(), g.dy());
  const double omega = 2.0 / (1.0 + std::sin(std::numbers::pi * h / std::max(g.Lx, g.Ly)));
  const int cap = opts.iteration_cap(g) * 10;
  double rel = 1.0;
  int it = 0;
  const int nx = g.nx;
  while (true) {
    for (int color = 0; color < 2; ++color) {
      for (int j = 1; j < g.ny - 1; ++j) {
        for (int i = (j + color) % 2; i < nx; i += 2) {
          const int e = (i + 1) % nx, w = (i + nx - 1) % nx;
          const double re = 0.5 * (rho(i, j) + rho(e, j)) * ix2;
          const double rw = 0.5 * (rho(i, j) + rho(w, j)) * ix2;
          const double rn = 0.5 * (rho(i, j) + rho(i, j + 1)) * iy2;
          const double rs = 0.5 * (rho(i, j) + rho(i, j - 1)) * iy2;
          const double diag = re + rw + rn + rs;
          const double gs =
              (re * psi(e, j) + rw * psi(w, j) + rn * psi(i, j + 1) + rs * psi(i, j - 1) - rhs(i, j)) / diag;
          psi(i, j) += omega * (gs - psi(i, j));
        }
      }
    }
    ++it;
    Field r = rhs;
    r -= flux_divergence(rho, psi);
    zero_walls(r);
    rel = std::sqrt(dot_interior(r, r)) / qnorm;
    sol.residual_history.push_back(rel);
    if (rel <= opts.rel_tol) break;
    if (it >= cap) throw EllipticNotConverged(it, rel);
  }
  sol.relative_residual = rel;
  sol.iterations = it;
  sol.psi = std::move(psi);
  return sol;
}

}  // namespace

Field flux_divergence(const Field& rho, const Field& psi) {
  require_same_grid(rho, psi, "flux_divergence");
  const GridSpec& g = psi.grid();
  Field out(g, BcClass::PeriodicX_ExtrapY);
  const double ix2 = 1.0 / (g.dx() * g.dx());
  const double iy2 = 1.0 / (g.dy() * g.dy());
  const int nx = g.nx;
  for (int j = 1; j < g.ny - 1; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int e = (i + 1) % nx, w = (i + nx - 1) % nx;
      const double rc = rho(i, j);
      const double fe = 0.5 * (rc + rho(e, j)) * (psi(e, j) - psi(i, j));
      const double fw = 0.5 * (rc + rho(w, j)) * (psi(i, j) - psi(w, j));
      const double fn = 0.5 * (rc + rho(i, j + 1)) * (psi(i, j + 1) - psi(i, j));
      const double fs = 0.5 * (rc + rho(i, j - 1)) * (psi(i, j) - psi(i, j - 1));
      out(i, j) = (fe - fw) * ix2 + (fn - fs) * iy2;
    }
  }
  return out;
}

Field solve_poisson_const(const Field& q) { return fast_poisson_for(q.grid()).solve(q); }

EllipticSolution solve_poisson_variable_detailed(const Field& rho, const Field& q, const EllipticOptions& opts) {
  require_same_grid(rho, q, "solve_poisson_variable");
  opts.validate();
  if (!(rho.min() > 0.0)) throw NonPositiveDensity();
  switch (opts.method) {
    case EllipticMethod::PCG_FFT: return solve_pcg(rho, q, opts);
    case EllipticMethod::SOR: return solve_sor(rho, q, opts);
  }
  throw std::logic_error("unreachable elliptic method");
}

Field solve_poisson_variable(const Field& rho, const Field& q, const EllipticOptions& opts) {
  return solve_poisson_variable_detailed(rho, q, opts).psi;
}

}  // namespace wmfi
