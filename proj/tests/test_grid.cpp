#include "doctest.h"
#include "support.hpp"

using namespace wmfi;
using namespace wmfi::test;

namespace {

constexpr BcClass kDir = BcClass::PeriodicX_DirichletY;
constexpr BcClass kNeu = BcClass::PeriodicX_NeumannY;
constexpr BcClass kExt = BcClass::PeriodicX_ExtrapY;

// Error of an operator against an analytic oracle, at resolution n.
template <class Op, class Exact>
double op_error(int n, BcClass bc, auto&& f, Op op, Exact exact, int j0 = 1) {
  const GridSpec g = square(n);
  const Field in = Field::from_function(g, bc, f);
  const Field out = op(in);
  const Field ref = Field::from_function(g, bc, exact);
  return max_abs_inner(out - ref, 0, j0);
}

}  // namespace

TEST_CASE("grid spec validation and spacings") {
  GridSpec g = square(128);
  CHECK(g.dx() == doctest::Approx(50.0 / 128));
  CHECK(g.dy() == doctest::Approx(50.0 / 128));
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS((GridSpec{7, 16, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{9, 16, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{16, 8, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{16, 16, 0, 1}.validate()), std::invalid_argument);
}

TEST_CASE("field storage, arithmetic and checks") {
  const GridSpec g = square(8);
  Field f(g, kNeu);
  CHECK(f.size() == g.size());
  f(3, 2) = 5.0;
  CHECK(f.values()[2 * 8 + 3] == 5.0);
  CHECK(f.wrapped(11, 2) == 5.0);
  CHECK(f.wrapped(-5, 2) == 5.0);
  CHECK(f.all_finite());
  f(0, 0) = std::nan("");
  CHECK_FALSE(f.all_finite());
  const Field a = Field::from_function(square(8), kNeu, [](double, double) { return 1.0; });
  const Field b = Field::from_function(square(16), kNeu, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(jacobian(a, b), GridMismatch);
  CHECK_THROWS_AS(Field(a) += b, GridMismatch);
  CHECK(bc_from_string(to_string(kExt)) == kExt);
  CHECK_THROWS(bc_from_string("Periodic"));
}

TEST_CASE("ddx and ddy") {
  const GridSpec g = square(32);
  SUBCASE("constant has zero derivative") {
    const Field c = Field::from_function(g, kExt, [](double, double) { return 3.5; });
    CHECK(ddx(c).max_abs() == 0.0);
    CHECK(ddy(c).max_abs() == 0.0);
  }
  SUBCASE("ddx of sin converges at second order") {
    const double k = 2 * pi / 50.0;
    auto f = [&](double x, double) { return std::sin(k * x); };
    auto df = [&](double x, double) { return k * std::cos(k * x); };
    const double e1 = op_error(32, kExt, f, [](const Field& u) { return ddx(u); }, df, 0);
    const double e2 = op_error(64, kExt, f, [](const Field& u) { return ddx(u); }, df, 0);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    // Fitted constant C in e = C dx^2 agrees at both resolutions.
    CHECK(e1 / std::pow(50.0 / 32, 2) == doctest::Approx(e2 / std::pow(50.0 / 64, 2)).epsilon(0.15));
  }
  SUBCASE("Neumann class forces zero normal derivative on the walls") {
    const Field y = Field::from_function(g, kNeu, [](double, double yy) { return yy; });
    const Field d = ddy(y);
    for (int i = 0; i < g.nx; ++i) {
      CHECK(d(i, 0) == 0.0);
      CHECK(d(i, g.ny - 1) == 0.0);
      CHECK(d(i, g.ny / 2) == doctest::Approx(1.0));
    }
  }
  SUBCASE("one-sided wall stencil is exact for quadratics") {
    const Field q = Field::from_function(g, kExt, [](double, double yy) { return yy * yy; });
    const Field d = ddy(q);
    CHECK(d(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d(5, g.ny - 1) == doctest::Approx(100.0));
  }
}

TEST_CASE("laplacian") {
  const GridSpec g = square(32);
  SUBCASE("constant") {
    const Field c = Field::from_function(g, kNeu, [](double, double) { return -2.0; });
    CHECK(laplacian(c).max_abs() == 0.0);
  }
  SUBCASE("quadratic with extrapolated ghosts is exact away from the x seam") {
    const Field q = Field::from_function(g, kExt, [](double x, double y) { return x * x + y * y; });
    const Field l = laplacian(q);
    double err = 0.0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx - 1; ++i) err = std::max(err, std::abs(l(i, j) - 4.0));
    CHECK(err < 1e-9);
  }
  SUBCASE("sin sin eigenfunction converges at second order") {
    auto f = [](double x, double y) { return std::sin(2 * pi * x / 50) * std::sin(pi * y / 50); };
    const double lam = std::pow(2 * pi / 50, 2) + std::pow(pi / 50, 2);
    auto ref = [&](double x, double y) { return -lam * f(x, y); };
    auto lap = [](const Field& u) { return laplacian(u); };
    const double e1 = op_error(32, kDir, f, lap, ref, 0);
    const double e2 = op_error(64, kDir, f, lap, ref, 0);
    CHECK(e1 < 1e-2 * lam);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("Arakawa jacobian") {
  const GridSpec g = square(32);
  SUBCASE("J(f, f) vanishes bit-wise") {
    const Field f = noise(g, kNeu, 1);
    const Field j = jacobian(f, f);
    for (double v : j.values()) CHECK(v == 0.0);
  }
  SUBCASE("antisymmetry is bit-wise for random data") {
    for (std::uint64_t s = 0; s < 4; ++s) {
      const Field f = noise(g, kDir, 10 + s), h = noise(g, kNeu, 20 + s);
      const Field sum = jacobian(f, h) + jacobian(h, f);
      CHECK(sum.max_abs() == 0.0);
    }
  }
  SUBCASE("canonical coordinates") {
    const Field x = Field::from_function(g, kExt, [](double xx, double) { return xx; });
    const Field y = Field::from_function(g, kExt, [](double, double yy) { return yy; });
    const Field j = jacobian(x, y);
    double err = 0.0;
    for (int jj = 1; jj < g.ny - 1; ++jj)
      for (int i = 1; i < g.nx - 1; ++i) err = std::max(err, std::abs(j(i, jj) - 1.0));
    CHECK(err < 1e-12);
  }
  SUBCASE("sin(x) sin(y) against the analytic product converges at second order") {
    auto f = [](double x, double) { return std::sin(2 * pi * x / 50); };
    auto h = [](double, double y) { return std::sin(2 * pi * y / 50); };
    auto ref = [](double x, double y) {
      return 4 * pi * pi / (50.0 * 50.0) * std::cos(2 * pi * x / 50) * std::cos(2 * pi * y / 50);
    };
    auto err = [&](int n) {
      const GridSpec gg = square(n);
      const Field F = Field::from_function(gg, kExt, f), H = Field::from_function(gg, kExt, h);
      return max_abs_inner(jacobian(F, H) - Field::from_function(gg, kExt, ref));
    };
    const double e1 = err(32), e2 = err(64);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  }
  SUBCASE("integral conservation for wall-constant stream functions") {
    for (std::uint64_t s = 0; s < 4; ++s) {
      const Field psi = zero_walls(noise(g, kDir, 30 + s));
      const Field q = noise(g, kNeu, 40 + s);
      const Field j = jacobian(psi, q);
      const double scale = psi.max_abs() * q.max_abs() * g.Lx * g.Ly;
      CHECK(std::abs(integrate(j)) <= 1e-10 * scale);
      CHECK(std::abs(inner(psi, j)) <= 1e-10 * scale * psi.max_abs());
      CHECK(std::abs(inner(q, j)) <= 1e-10 * scale * q.max_abs());
    }
  }
}

TEST_CASE("grad_perp") {
  const GridSpec g = square(32);
  SUBCASE("zero stream function") {
    auto [u, v] = grad_perp(Field(g, kDir));
    CHECK(u.max_abs() == 0.0);
    CHECK(v.max_abs() == 0.0);
  }
  SUBCASE("psi = y gives u = -1, v = 0") {
    auto [u, v] = grad_perp(Field::from_function(g, kDir, [](double, double y) { return y; }));
    CHECK(max_abs_inner(u + Field::from_function(g, u.bc(), [](double, double) { return 1.0; })) < 1e-12);
    CHECK(v.max_abs() == 0.0);
  }
  SUBCASE("no normal flow through the walls and discrete divergence free") {
    const Field psi = Field::from_function(
        g, kDir, [](double x, double y) { return std::sin(2 * pi * x / 50) * std::sin(pi * y / 50); });
    auto [u, v] = grad_perp(zero_walls(psi));
    for (int i = 0; i < g.nx; ++i) {
      CHECK(v(i, 0) == 0.0);
      CHECK(v(i, g.ny - 1) == 0.0);
    }
    CHECK(max_abs_inner(ddx(u) + ddy(v)) <= 1e-12);
  }
  SUBCASE("rejects non-Dirichlet input") { CHECK_THROWS(grad_perp(Field(g, kNeu))); }
}

TEST_CASE("integrate") {
  const GridSpec g = square(128);
  CHECK(integrate(Field::from_function(g, kNeu, [](double, double) { return 1.0; })) == doctest::Approx(2500.0));
  CHECK(std::abs(integrate(Field::from_function(g, kNeu, [](double x, double) { return std::sin(2 * pi * x / 50); }))) <=
        1e-12);
  auto err = [](int n) {
    const GridSpec gg = square(n);
    const double v = integrate(Field::from_function(gg, kNeu, [](double, double y) { return std::sin(pi * y / 50); }));
    return std::abs(v - 50.0 * 2.0 * 50.0 / pi);
  };
  CHECK(err(64) < 1e-3 * 50.0 * 2.0 * 50.0 / pi);
  CHECK(err(32) / err(64) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("bilinear sampling reproduces linear data and wraps in x") {
  const GridSpec g = square(16);
  const Field f = Field::from_function(g, kExt, [](double, double y) { return 2.0 * y - 1.0; });
  CHECK(sample_bilinear(f, 7.3, 12.1) == doctest::Approx(2 * 12.1 - 1));
  CHECK(sample_bilinear(f, 57.3, 12.1) == doctest::Approx(2 * 12.1 - 1));
  CHECK(sample_bilinear(f, 1.0, -3.0) == doctest::Approx(-1.0));
  const Field c = Field::from_function(g, kExt, [](double x, double) { return std::cos(2 * pi * x / 50); });
  CHECK(sample_bilinear(c, -1e-9, 4.0) == doctest::Approx(1.0).epsilon(1e-6));
}
