#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wmfi {

/// Structured node grid on [0, Lx) x [0, Ly]: periodic in x with nx distinct
/// columns, node-inclusive in y with boundary rows on y = 0 and y = Ly.
struct GridSpec {
  int nx = 128;
  int ny = 129;
  double Lx = 50.0;
  double Ly = 50.0;

  double dx() const { return Lx / nx; }
  double dy() const { return Ly / (ny - 1); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  double x(int i) const { return i * dx(); }
  double y(int j) const { return j * dy(); }

  /// Throws std::invalid_argument when nx, ny or the extents are out of range.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

/// Treatment of the y-boundary rows. Operators consult it only at y = 0 and
/// y = Ly; x is always periodic.
///
/// Ghost rows used by the stencils:
///   DirichletY  - reflected about the wall value (2 f_0 - f_1)
///   NeumannY    - mirrored (f_1), zero normal derivative
///   ExtrapY     - quadratic extrapolation (3 f_0 - 3 f_1 + f_2)
enum class BcClass { PeriodicX_DirichletY, PeriodicX_NeumannY, PeriodicX_ExtrapY };

std::string to_string(BcClass bc);
BcClass bc_from_string(const std::string& s);

class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Scalar sample array on a GridSpec, row-major by y then x.
class Field {
 public:
  Field() = default;
  Field(const GridSpec& grid, BcClass bc, std::string units = {});
  Field(const GridSpec& grid, BcClass bc, std::vector<double> data, std::string units = {});

  /// Samples f(x, y) at every node.
  template <class Fn>
  static Field from_function(const GridSpec& grid, BcClass bc, Fn&& fn) {
    Field f(grid, bc);
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) f(i, j) = fn(grid.x(i), grid.y(j));
    return f;
  }

  const GridSpec& grid() const { return grid_; }
  BcClass bc() const { return bc_; }
  const std::string& units() const { return units_; }
  void set_bc(BcClass bc) { bc_ = bc; }
  void set_units(std::string u) { units_ = std::move(u); }

  double& operator()(int i, int j) { return data_[index(i, j)]; }
  double operator()(int i, int j) const { return data_[index(i, j)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::size_t size() const { return data_.size(); }

  /// Row j with the periodic x wrap applied to i.
  double wrapped(int i, int j) const {
    const int nx = grid_.nx;
    i %= nx;
    if (i < 0) i += nx;
    return data_[index(i, j)];
  }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  /// this += s * other
  Field& axpy(double s, const Field& other);

  void fill(double v);
  bool all_finite() const;
  double max_abs() const;
  double min() const;
  double max() const;

  bool operator==(const Field& other) const {
    return grid_ == other.grid_ && bc_ == other.bc_ && data_ == other.data_;
  }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.nx) + static_cast<std::size_t>(i);
  }

  GridSpec grid_{};
  BcClass bc_ = BcClass::PeriodicX_ExtrapY;
  std::vector<double> data_;
  std::string units_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
/// Sample-wise product; the result takes a's boundary class.
Field hadamard(const Field& a, const Field& b);

void require_same_grid(const Field& a, const Field& b, const char* where);

// Discrete operators. All are second order; x wraps periodically, y-boundary
// rows use the ghost row implied by the field's BcClass.

Field ddx(const Field& f);
/// Centered in the interior. At the boundary rows: DirichletY and ExtrapY use the
/// one-sided second-order stencil, NeumannY returns 0.
Field ddy(const Field& f);
Field laplacian(const Field& f);

/// Arakawa (1966) 9-point Jacobian J(f, h) = f_x h_y - f_y h_x, the average of
/// the three canonical second-order forms. Evaluated on every row including the
/// walls. Antisymmetric sample-wise; for a DirichletY f that is constant on each
/// wall paired with a NeumannY h, the trapezoid integrals of J, f J and h J
/// vanish to round-off.
Field jacobian(const Field& f, const Field& h);

/// u = grad_perp(psi) = (-d_y psi, d_x psi). psi must be DirichletY.
std::pair<Field, Field> grad_perp(const Field& psi);

/// Trapezoid in y, rectangle (periodic) in x. Fixed summation order.
double integrate(const Field& f);
/// Trapezoid-weighted inner product <f, h>.
double inner(const Field& f, const Field& h);

/// Bilinear interpolation at an arbitrary point; x wraps, y is clamped to [0, Ly].
double sample_bilinear(const Field& f, double x, double y);

}  // namespace wmfi
