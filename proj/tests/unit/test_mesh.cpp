#include <doctest.h>

#include "msuq/mesh.hpp"

#include <cmath>
#include <random>

using namespace msuq;

namespace {
Box unit_box() { return Box{{0.0, 0.0}, {1.0, 1.0}}; }
}  // namespace

TEST_CASE("1D periodic mesh identifies the end points") {
  auto mesh = PeriodicMesh::build(1, unit_box(), {4, 1});
  CHECK(mesh.num_vertices() == 4);
  CHECK(mesh.num_cells() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(mesh.vertex(i)[0] == doctest::Approx(0.25 * i));
  // last cell wraps back onto vertex 0
  auto last = mesh.cell_vertices(3);
  CHECK(last[0] == 3);
  CHECK(last[1] == 0);
  CHECK(mesh.cell_coordinates(3)[1][0] == doctest::Approx(1.0));
}

TEST_CASE("double-well sized mesh") {
  auto mesh = PeriodicMesh::build(1, Box{{-4.0, 0.0}, {4.0, 0.0}}, {2048, 1});
  CHECK(mesh.num_vertices() == 2048);
  CHECK(mesh.spacing(0) == doctest::Approx(8.0 / 2048));
  CHECK(mesh.measure() == doctest::Approx(8.0));
}

TEST_CASE("2D mesh counts and measures") {
  auto mesh = PeriodicMesh::build(2, Box{{-0.5, -0.5}, {0.5, 0.5}}, {8, 8});
  CHECK(mesh.num_vertices() == 64);
  CHECK(mesh.num_cells() == 128);
  double total = 0.0;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    CHECK(mesh.cell_measure(c) > 0.0);
    total += mesh.cell_measure(c);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // every dof is used by some cell
  std::vector<int> used(64, 0);
  for (Index c = 0; c < mesh.num_cells(); ++c)
    for (Index v : mesh.cell_vertices(c)) used[static_cast<std::size_t>(v)]++;
  for (int u : used) CHECK(u == 6);
}

TEST_CASE("diagonal runs from lower left to upper right") {
  auto mesh = PeriodicMesh::build(2, unit_box(), {2, 2});
  auto p = mesh.cell_coordinates(0);
  CHECK(p[0] == Point{0.0, 0.0});
  CHECK(p[1] == Point{0.5, 0.0});
  CHECK(p[2] == Point{0.5, 0.5});
  auto q = mesh.cell_coordinates(1);
  CHECK(q[1] == Point{0.5, 0.5});
  CHECK(q[2] == Point{0.0, 0.5});
}

TEST_CASE("mesh construction errors") {
  CHECK_THROWS_AS(PeriodicMesh::build(1, unit_box(), {1, 1}), ConfigError);
  CHECK_THROWS_AS(PeriodicMesh::build(3, unit_box(), {4, 4}), ConfigError);
  CHECK_THROWS_AS(PeriodicMesh::build(2, unit_box(), {4, 1}), ConfigError);
  CHECK_THROWS_AS(PeriodicMesh::build(1, Box{{1.0, 0.0}, {1.0, 0.0}}, {4, 1}), ConfigError);
}

TEST_CASE("nesting ratios") {
  auto b = Box{{-4.0, 0.0}, {4.0, 0.0}};
  CHECK(nest(build_space(1, b, {16, 1}), build_space(1, b, {2048, 1})).ratio(0) == 128);
  CHECK(nest(build_space(1, unit_box(), {4, 1}), build_space(1, unit_box(), {8, 1})).ratio(0) == 2);
  CHECK_THROWS_AS(nest(build_space(1, unit_box(), {3, 1}), build_space(1, unit_box(), {8, 1})), ConfigError);
  CHECK_THROWS_AS(nest(build_space(1, unit_box(), {4, 1}), build_space(1, unit_box(), {4, 1})), ConfigError);
  CHECK_THROWS_AS(nest(build_space(1, unit_box(), {4, 1}), build_space(1, b, {8, 1})), ConfigError);
}

TEST_CASE("evaluation of P1 functions") {
  auto space = build_space(1, unit_box(), {4, 1});
  Vector c = Vector::Constant(4, 3.5);
  for (double x : {0.0, 0.13, 0.5, 0.99, 1.0, -0.2, 2.7}) CHECK(space.eval(c, Point{x, 0.0}) == doctest::Approx(3.5));

  Vector hat = Vector::Zero(4);
  hat[2] = 1.0;
  for (Index i = 0; i < 4; ++i) CHECK(space.eval(hat, space.mesh().vertex(i)) == (i == 2 ? 1.0 : 0.0));

  Vector lin(4);
  lin << 1.0, 5.0, 0.0, 0.0;
  CHECK(space.eval(lin, Point{0.125, 0.0}) == doctest::Approx(3.0));
  CHECK_THROWS_AS(space.eval(Vector::Zero(3), Point{0.1, 0.0}), ConfigError);
}

TEST_CASE("partition of unity and periodicity in 2D") {
  auto space = build_space(2, Box{{-0.5, -0.5}, {0.5, 0.5}}, {6, 4});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Vector random = Vector::Random(space.dof_count());
  for (int t = 0; t < 200; ++t) {
    Point x{u(rng), u(rng)};
    double sum = 0.0;
    for (Index i = 0; i < space.dof_count(); ++i) {
      Vector e = Vector::Zero(space.dof_count());
      e[i] = 1.0;
      sum += space.eval(e, x);
    }
    CHECK(std::abs(sum - 1.0) < 1e-13);
  }
  for (double y : {-0.5, -0.31, 0.0, 0.27}) {
    CHECK(space.eval(random, Point{-0.5, y}) == doctest::Approx(space.eval(random, Point{0.5, y})).epsilon(1e-13));
    CHECK(space.eval(random, Point{y, -0.5}) == doctest::Approx(space.eval(random, Point{y, 0.5})).epsilon(1e-13));
  }
}

TEST_CASE("nesting is exact") {
  for (int dim : {1, 2}) {
    std::array<Index, 2> cc = dim == 1 ? std::array<Index, 2>{4, 1} : std::array<Index, 2>{4, 3};
    std::array<Index, 2> fc = dim == 1 ? std::array<Index, 2>{12, 1} : std::array<Index, 2>{12, 9};
    auto coarse = build_space(dim, unit_box(), cc);
    auto fine = build_space(dim, unit_box(), fc);
    auto map = nest(coarse, fine);
    Vector c = Vector::Random(coarse.dof_count());
    Vector f = map.prolong(c);
    CHECK((map.restrict_nodal(f) - c).norm() == doctest::Approx(0.0));
    // the prolonged function equals the coarse function everywhere
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
      Point x{u(rng), dim == 2 ? u(rng) : 0.0};
      CHECK(fine.eval(f, x) == doctest::Approx(coarse.eval(c, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("wrap and locate") {
  auto mesh = PeriodicMesh::build(2, unit_box(), {4, 4});
  auto w = mesh.wrap(Point{1.0, -0.25});
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(0.75));
  auto loc = mesh.locate(Point{0.3, 0.1});
  double s = loc.barycentric[0] + loc.barycentric[1] + loc.barycentric[2];
  CHECK(s == doctest::Approx(1.0));
  for (double b : loc.barycentric) CHECK(b >= -1e-14);
}
