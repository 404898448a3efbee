#include "wmfi/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wmfi {

void GridSpec::validate() const {
  if (nx < 8 || nx % 2 != 0) throw std::invalid_argument("grid: nx must be even and >= 8");
  if (ny < 9) throw std::invalid_argument("grid: ny must be >= 9");
  if (!(Lx > 0.0) || !(Ly > 0.0) || !std::isfinite(Lx) || !std::isfinite(Ly))
    throw std::invalid_argument("grid: extents must be positive and finite");
}

std::string to_string(BcClass bc) {
  switch (bc) {
    case BcClass::PeriodicX_DirichletY: return "PeriodicX_DirichletY";
    case BcClass::PeriodicX_NeumannY: return "PeriodicX_NeumannY";
    case BcClass::PeriodicX_ExtrapY: return "PeriodicX_ExtrapY";
  }
  return "?";
}

BcClass bc_from_string(const std::string& s) {
  if (s == "PeriodicX_DirichletY") return BcClass::PeriodicX_DirichletY;
  if (s == "PeriodicX_NeumannY") return BcClass::PeriodicX_NeumannY;
  if (s == "PeriodicX_ExtrapY") return BcClass::PeriodicX_ExtrapY;
  throw std::invalid_argument("unknown boundary class '" + s + "'");
}

Field::Field(const GridSpec& grid, BcClass bc, std::string units)
    : grid_(grid), bc_(bc), data_(grid.size(), 0.0), units_(std::move(units)) {}

Field::Field(const GridSpec& grid, BcClass bc, std::vector<double> data, std::string units)
    : grid_(grid), bc_(bc), data_(std::move(data)), units_(std::move(units)) {
  if (data_.size() != grid_.size()) throw std::invalid_argument("field: data length != nx*ny");
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!(a.grid() == b.grid()))
    throw GridMismatch(std::string(where) + ": fields live on different grids");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(*this, other, "operator-=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(*this, other, "axpy");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * other.data_[k];
  return *this;
}

void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Field::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Field::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double Field::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::max(m, v);
  return m;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

Field hadamard(const Field& a, const Field& b) {
  require_same_grid(a, b, "hadamard");
  Field out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] *= bv[k];
  return out;
}

namespace {

enum class GhostUse { Derivative, Jacobian };

// Ghost row outside the wall at j = 0 (low) or j = ny-1 (high).
std::vector<double> ghost_row(const Field& f, bool low, GhostUse use) {
  const GridSpec& g = f.grid();
  const int j0 = low ? 0 : g.ny - 1;
  const int j1 = low ? 1 : g.ny - 2;
  const int j2 = low ? 2 : g.ny - 3;
  std::vector<double> out(static_cast<std::size_t>(g.nx));
  BcClass bc = f.bc();
  // For derivatives the Dirichlet wall value carries no normal information, so
  // the one-sided (extrapolated) stencil is the second-order choice.
  if (use == GhostUse::Derivative && bc == BcClass::PeriodicX_DirichletY) bc = BcClass::PeriodicX_ExtrapY;
  for (int i = 0; i < g.nx; ++i) {
    const double f0 = f(i, j0), f1 = f(i, j1);
    double v = 0.0;
    switch (bc) {
      case BcClass::PeriodicX_DirichletY: v = 2.0 * f0 - f1; break;
      case BcClass::PeriodicX_NeumannY: v = f1; break;
      case BcClass::PeriodicX_ExtrapY: v = 3.0 * f0 - 3.0 * f1 + f(i, j2); break;
    }
    out[static_cast<std::size_t>(i)] = v;
  }
  return out;
}

// Row accessor over the ghost-extended array: rows -1 .. ny.
class PaddedRows {
 public:
  PaddedRows(const Field& f, GhostUse use)
      : f_(f), lo_(ghost_row(f, true, use)), hi_(ghost_row(f, false, use)) {}

  const double* row(int j) const {
    if (j < 0) return lo_.data();
    if (j >= f_.grid().ny) return hi_.data();
    return f_.values().data() + static_cast<std::size_t>(j) * static_cast<std::size_t>(f_.grid().nx);
  }

 private:
  const Field& f_;
  std::vector<double> lo_, hi_;
};

}  // namespace

Field ddx(const Field& f) {
  const GridSpec& g = f.grid();
  Field out(g, BcClass::PeriodicX_ExtrapY);
  const double inv = 1.0 / (2.0 * g.dx());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
      out(i, j) = (f(ip, j) - f(im, j)) * inv;
    }
  }
  return out;
}

Field ddy(const Field& f) {
  const GridSpec& g = f.grid();
  Field out(g, BcClass::PeriodicX_ExtrapY);
  const PaddedRows p(f, GhostUse::Derivative);
  const double inv = 1.0 / (2.0 * g.dy());
  for (int j = 0; j < g.ny; ++j) {
    const double* n = p.row(j + 1);
    const double* s = p.row(j - 1);
    for (int i = 0; i < g.nx; ++i) out(i, j) = (n[i] - s[i]) * inv;
  }
  return out;
}

Field laplacian(const Field& f) {
  const GridSpec& g = f.grid();
  Field out(g, BcClass::PeriodicX_ExtrapY);
  const PaddedRows p(f, GhostUse::Jacobian);
  const double ix2 = 1.0 / (g.dx() * g.dx());
  const double iy2 = 1.0 / (g.dy() * g.dy());
  const int nx = g.nx;
  for (int j = 0; j < g.ny; ++j) {
    const double* n = p.row(j + 1);
    const double* c = p.row(j);
    const double* s = p.row(j - 1);
    for (int i = 0; i < nx; ++i) {
      const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
      out(i, j) = (c[ip] - 2.0 * c[i] + c[im]) * ix2 + (n[i] - 2.0 * c[i] + s[i]) * iy2;
    }
  }
  return out;
}

Field jacobian(const Field& f, const Field& h) {
  require_same_grid(f, h, "jacobian");
  const GridSpec& g = f.grid();
  Field out(g, BcClass::PeriodicX_ExtrapY);
  const PaddedRows pf(f, GhostUse::Jacobian);
  const PaddedRows ph(h, GhostUse::Jacobian);
  const int nx = g.nx;
  const double scale = 1.0 / (12.0 * g.dx() * g.dy());
  for (int j = 0; j < g.ny; ++j) {
    const double* fn = pf.row(j + 1);
    const double* fc = pf.row(j);
    const double* fs = pf.row(j - 1);
    const double* hn = ph.row(j + 1);
    const double* hc = ph.row(j);
    const double* hs = ph.row(j - 1);
    for (int i = 0; i < nx; ++i) {
      const int e = (i + 1) % nx, w = (i + nx - 1) % nx;
      // Advective form split as P(f,h) - P(h,f); the cross form X(f,h) equals
      // -X'(h,f) of the third Arakawa form, so writing both as differences makes
      // the result exactly antisymmetric.
      const double pfh = (fc[e] - fc[w]) * (hn[i] - hs[i]);
      const double phf = (hc[e] - hc[w]) * (fn[i] - fs[i]);
      const double xfh = fc[e] * (hn[e] - hs[e]) - fc[w] * (hn[w] - hs[w]) - fn[i] * (hn[e] - hn[w]) +
                         fs[i] * (hs[e] - hs[w]);
      const double xhf = hc[e] * (fn[e] - fs[e]) - hc[w] * (fn[w] - fs[w]) - hn[i] * (fn[e] - fn[w]) +
                         hs[i] * (fs[e] - fs[w]);
      out(i, j) = ((pfh - phf) + (xfh - xhf)) * scale;
    }
  }
  return out;
}

std::pair<Field, Field> grad_perp(const Field& psi) {
  if (psi.bc() != BcClass::PeriodicX_DirichletY)
    throw std::invalid_argument("grad_perp: stream function must carry PeriodicX_DirichletY");
  Field u = ddy(psi);
  u *= -1.0;
  Field v = ddx(psi);
  v.set_bc(BcClass::PeriodicX_DirichletY);
  return {std::move(u), std::move(v)};
}

double inner(const Field& f, const Field& h) {
  require_same_grid(f, h, "inner");
  const GridSpec& g = f.grid();
  double total = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) row += f(i, j) * h(i, j);
    const double w = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    total += w * row;
  }
  return total * g.dx() * g.dy();
}

double integrate(const Field& f) {
  const GridSpec& g = f.grid();
  double total = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) row += f(i, j);
    const double w = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    total += w * row;
  }
  return total * g.dx() * g.dy();
}

double sample_bilinear(const Field& f, double x, double y) {
  const GridSpec& g = f.grid();
  const double gx = x / g.dx();
  const double fl = std::floor(gx);
  const double tx = gx - fl;
  const int i0 = static_cast<int>(fl);
  const double gy = std::clamp(y, 0.0, g.Ly) / g.dy();
  int j0 = std::min(static_cast<int>(std::floor(gy)), g.ny - 2);
  const double ty = gy - j0;
  const double f00 = f.wrapped(i0, j0), f10 = f.wrapped(i0 + 1, j0);
  const double f01 = f.wrapped(i0, j0 + 1), f11 = f.wrapped(i0 + 1, j0 + 1);
  return (1.0 - ty) * ((1.0 - tx) * f00 + tx * f10) + ty * ((1.0 - tx) * f01 + tx * f11);
}

}  // namespace wmfi
