#include <doctest.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "lwct/error.hpp"
#include "lwct/keyvalue.hpp"
#include "lwct/raw_io.hpp"
#include "lwct/sparse.hpp"
#include "support.hpp"

using namespace lwct;

TEST_CASE("circular geometry angle steps") {
  const auto g720 = make_circular_geometry(720, 4, 4, 1.0, 100.0);
  CHECK(g720.views() == 720);
  CHECK(g720.angles()[1] - g720.angles()[0] == doctest::Approx(0.5 * kPi / 180.0).epsilon(1e-12));
  CHECK(g720.angles().back() < kTwoPi);

  const auto g1 = make_circular_geometry(1, 4, 4, 1.0, 100.0);
  REQUIRE(g1.views() == 1);
  CHECK(g1.angles()[0] == 0.0);

  const auto g60 = make_circular_geometry(60, 4, 4, 1.0, 100.0);
  CHECK(g60.views() == 60);
  for (std::size_t i = 0; i < 60; ++i)
    CHECK(g60.angles()[i] == doctest::Approx(6.0 * static_cast<double>(i) * kPi / 180.0).epsilon(1e-12));
}

TEST_CASE("geometry rejects invalid parameters") {
  CHECK_THROWS_AS(ScanGeometry(0.0, 4, 4, 1.0, {0.0}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 1, 4, 1.0, {0.0}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 4, 4, 0.0, {0.0}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 4, 4, 1.0, {}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 4, 4, 1.0, {0.5, 0.5}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 4, 4, 1.0, {kTwoPi}), DataError);
  CHECK_THROWS_AS(ScanGeometry(100.0, 4, 4, 1.0, {std::nan("")}), DataError);
}

TEST_CASE("detector pixel centers are symmetric about the axis") {
  const ScanGeometry g(100.0, 3, 4, 0.5, {0.0});
  CHECK(g.col_coord(0) == -0.75);
  CHECK(g.col_coord(3) == 0.75);
  CHECK(g.row_coord(1) == 0.0);
  const ScanGeometry shifted(100.0, 3, 4, 0.5, {0.0}, 0.25, -1.0);
  CHECK(shifted.col_coord(0) == -1.75);
  CHECK(shifted.row_coord(1) == 0.25);
}

TEST_CASE("projection stack validates shape and values") {
  const auto g = make_circular_geometry(2, 3, 4, 1.0, 100.0);
  CHECK_THROWS_AS(ProjectionStack(g, Array3<float>(3, 3, 4)), DataError);
  CHECK_THROWS_AS(ProjectionStack(g, Array3<float>(2, 4, 4)), DataError);
  Array3<float> bad(2, 3, 4);
  bad(1, 2, 3) = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(ProjectionStack(g, bad), DataError);
  CHECK_NOTHROW(ProjectionStack(g, Array3<float>(2, 3, 4)));
}

TEST_CASE("key=value records") {
  const auto kv = KeyValues::parse("# comment\n a = 1.5 \n\nlist=1,2,3\nname=x y\n");
  CHECK(kv.get_double("a") == 1.5);
  CHECK(kv.get_sizes("list") == std::vector<std::size_t>{1, 2, 3});
  CHECK(kv.get("name") == "x y");
  CHECK(kv.get_size_or("missing", 7) == 7);
  try {
    kv.get("views");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "views");
    CHECK(std::string(e.what()).find("views") != std::string::npos);
  }
  CHECK_THROWS_AS(kv.get_size("a"), ConfigError);
  CHECK_THROWS_AS(KeyValues::parse("no equals sign"), ConfigError);
}

TEST_CASE("double formatting round-trips bit-exactly") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::bit_cast<double>(rng());
    if (!std::isfinite(v)) continue;
    const double back = parse_double(format_double(v), "v");
    CHECK(std::bit_cast<std::uint64_t>(back) == std::bit_cast<std::uint64_t>(v));
  }
  CHECK(parse_double(format_double(0.1), "v") == 0.1);
}

TEST_CASE("raw projections round-trip with sidecar and angles") {
  test::TempDir dir("raw");
  const auto stack = test::random_stack(5, 3, 7, 3);
  const auto path = dir / "p.proj";
  write_projections(path, stack);
  CHECK(std::filesystem::file_size(path) == 5 * 3 * 7 * 4);
  CHECK(std::filesystem::exists(sidecar_path(path)));
  CHECK(std::filesystem::exists(angles_path(path)));
  const auto back = read_projections(path);
  CHECK(back == stack);

  // Little-endian float32 in (view, row, col) order, checked byte by byte.
  const auto bytes = read_binary_file(path);
  const std::size_t idx = (2 * 3 + 1) * 7 + 4;
  std::uint32_t word = 0;
  for (int b = 3; b >= 0; --b) word = (word << 8) | std::to_integer<std::uint32_t>(bytes[idx * 4 + b]);
  CHECK(std::bit_cast<float>(word) == stack.data()(2, 1, 4));

  const auto hdr = KeyValues::parse(read_text_file(sidecar_path(path)));
  CHECK(hdr.get("dtype") == "float32le");
  CHECK(hdr.get("kind") == "projection");
}

TEST_CASE("raw volume round-trip and corrupt input") {
  test::TempDir dir("vol");
  VolumeGrid grid{4, 3, 2, 0.5};
  Array3<float> data(2, 3, 4);
  for (std::size_t i = 0; i < data.size(); ++i) data.flat()[i] = static_cast<float>(i) * 0.25f;
  const Volume v(grid, data);
  const auto path = dir / "v.vol";
  write_volume(path, v);
  CHECK(read_volume(path) == v);

  std::filesystem::resize_file(path, 4 * 3 * 2 * 4 - 4);
  CHECK_THROWS_AS(read_volume(path), DataError);
  CHECK_THROWS_AS(read_volume(dir / "absent.vol"), DataError);
}

TEST_CASE("geometry text is exact") {
  const ScanGeometry g(612.25, 9, 11, 0.3, {0.0, 0.1, 1.0 / 3.0, 2.9}, 0.125, -0.7);
  CHECK(parse_geometry_text(geometry_text(g)) == g);
}

TEST_CASE("sparse sampling") {
  const auto stack = test::random_stack(720, 2, 3, 5);
  const auto sparse = sparse_sample(stack, 12);
  CHECK(sparse.views() == 60);
  for (std::size_t i = 0; i < 60; ++i) {
    CHECK(sparse.geometry().angles()[i] == stack.geometry().angles()[12 * i]);
    const auto a = sparse.view(i), b = stack.view(12 * i);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
  }
  CHECK(sparse_sample(stack, 1) == stack);
  CHECK_THROWS_AS(sparse_sample(stack, 7), DataError);
  CHECK_THROWS_AS(sparse_sample(stack, 0), DataError);
}
