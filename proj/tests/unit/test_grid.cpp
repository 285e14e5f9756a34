#include <doctest.h>

#include <limits>

#include "biosim/errors.hpp"
#include "biosim/grid.hpp"

using namespace biosim;

TEST_CASE("flat ordering runs j fastest") {
  const Grid g(4, 3, 2.0, 1.5);
  CHECK(g.order(1, 1) == 1);
  CHECK(g.order(1, 3) == 3);
  CHECK(g.order(2, 1) == 4);
  CHECK(g.order(4, 3) == 12);
  for (std::size_t p = 1; p <= g.cell_count(); ++p) {
    const auto [i, j] = g.inverse_order(p);
    CHECK(g.order(i, j) == p);
    CHECK(g.offset(i, j) == p - 1);
  }
}

TEST_CASE("square grids match the (i-1)N+j convention") {
  const Grid g = Grid::square(5);
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) CHECK(g.order(i, j) == static_cast<std::size_t>((i - 1) * 5 + j));
}

TEST_CASE("index errors") {
  const Grid g = Grid::square(3);
  CHECK_THROWS_AS(g.order(0, 1), IndexError);
  CHECK_THROWS_AS(g.order(1, 4), IndexError);
  CHECK_THROWS_AS(g.inverse_order(0), IndexError);
  CHECK_THROWS_AS(g.inverse_order(10), IndexError);
}

TEST_CASE("grid parameters are validated") {
  CHECK_THROWS_AS(Grid(1, 4, 1.0, 4.0), ParameterError);
  CHECK_THROWS_AS(Grid(4, 4, 1.0, 2.0), ParameterError);
  CHECK_THROWS_AS(Grid(4, 4, -1.0, -1.0), ParameterError);
  CHECK_NOTHROW(Grid(8, 4, 2.0, 1.0));
}

TEST_CASE("cell centres sit half a cell in") {
  const Grid g(4, 2, 2.0, 1.0);
  CHECK(g.dx() == doctest::Approx(0.5));
  const auto [x, y] = g.cell_center(1, 1);
  CHECK(x == doctest::Approx(0.25));
  CHECK(y == doctest::Approx(0.25));
  const auto [x2, y2] = g.cell_center(4, 2);
  CHECK(x2 == doctest::Approx(1.75));
  CHECK(y2 == doctest::Approx(0.75));
}

TEST_CASE("colony initialization") {
  const Grid g = Grid::square(10);
  const Colony c{0.5, 0.0, 0.21, 0.7};
  const Field f = initialize_colonies(g, {&c, 1});
  // Centres (0.45,0.05) and (0.55,0.05) are inside, (0.25,0.05) outside.
  CHECK(f(5, 1) == 0.7);
  CHECK(f(6, 1) == 0.7);
  CHECK(f(3, 1) == 0.0);
  CHECK(f(5, 3) == 0.0);
  const Colony bad{0.5, 0.0, 0.1, 1.0};
  CHECK_THROWS_AS(initialize_colonies(g, {&bad, 1}), ParameterError);
  const Colony overlap[] = {{0.5, 0.0, 0.3, 0.2}, {0.5, 0.0, 0.1, 0.6}};
  const Field o = initialize_colonies(g, overlap);
  CHECK(o(5, 1) == 0.6);
  CHECK(o(5, 2) == 0.2);
}

TEST_CASE("field size and finiteness") {
  const Grid g = Grid::square(3);
  CHECK_THROWS_AS(Field(g, std::vector<double>(8)), ParameterError);
  Field f(g, 1.0);
  CHECK(f.all_finite());
  f(2, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(f.all_finite());
}
