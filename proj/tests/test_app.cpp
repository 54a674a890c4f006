#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "tlreg/app.hpp"
#include "tlreg/csv.hpp"

using namespace tlreg;

namespace {

RawTable wine_like(std::size_t n, std::uint64_t seed, double shift) {
  RngStream rng(seed, 0);
  RawTable t;
  t.columns = {"fixed acidity", "alcohol", "quality"};
  for (std::size_t i = 0; i < n; ++i) {
    const double alc = 8.0 + 6.0 * rng.uniform();
    const double q = std::round(3.0 + 0.4 * (alc - 8.0) + shift + rng.normal(0.0, 0.7));
    t.rows.push_back({7.0 + rng.uniform(), alc, q});
  }
  return t;
}

}  // namespace

TEST_CASE("parse_csv basics") {
  const auto f = parse_csv("a;b\n1;2", ';');
  CHECK(f.columns == std::vector<std::string>{"a", "b"});
  REQUIRE(f.rows.size() == 1);
  const auto t = to_numeric(f);
  CHECK(t.rows[0] == std::vector<double>{1.0, 2.0});

  const auto q = parse_csv("\"fixed acidity\";\"say \"\"hi\"\"\"\r\n7.4;5\r\n", ';');
  CHECK(q.columns == std::vector<std::string>{"fixed acidity", "say \"hi\""});
  CHECK(q.column_index("fixed acidity") == 0);
  CHECK(q.column_index("nope") == -1);

  CHECK_THROWS(parse_csv("a,b\n1,2,3\n"));
  CHECK_THROWS(parse_csv("a,a\n1,2\n"));
  try {
    to_numeric(parse_csv("a,b\n1,2\n3,x\n"));
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
}

TEST_CASE("load_csv reads files and counts rows") {
  const auto path = std::filesystem::temp_directory_path() / "tlreg_test_load.csv";
  {
    std::ofstream f(path);
    f << "\"x\";\"quality\"\n";
    for (int i = 0; i < 37; ++i) f << i * 0.5 << ';' << i % 7 << '\n';
  }
  const auto t = load_csv(path, ';');
  CHECK(t.size() == 37);
  CHECK(t.column("x")[3] == 1.5);
  CHECK_THROWS(load_csv(path.string() + ".missing", ';'));
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123, -0.0, 5e-324}) CHECK(parse_double(format_double(v)) == v);
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS(parse_double("1.5x"));
}

TEST_CASE("prepare split and normalization") {
  const auto red = wine_like(300, 1, 0.3), white = wine_like(500, 2, 0.0);
  const WineConfig cfg;
  const auto p = prepare(red, white, cfg, 9, 100);
  CHECK(p.dq_train.size() == 100);
  CHECK(p.dq_test.size() == 200);
  CHECK(p.dp.size() == 500);
  std::set<std::size_t> all(p.train_rows.begin(), p.train_rows.end());
  for (std::size_t r : p.test_rows) CHECK(all.insert(r).second);
  CHECK(all.size() == 300);

  // The map comes from white plus the training pool.
  double lo = 1e300, hi = -1e300;
  for (std::size_t r : p.train_rows) {
    lo = std::min(lo, red.rows[r][1]);
    hi = std::max(hi, red.rows[r][1]);
  }
  for (const auto& row : white.rows) {
    lo = std::min(lo, row[1]);
    hi = std::max(hi, row[1]);
  }
  CHECK(p.map.lo == lo);
  CHECK(p.map.hi == hi);
  double xmin = 1.0, xmax = 0.0;
  for (std::size_t i = 0; i < p.dp.size(); ++i) {
    xmin = std::min(xmin, p.dp.x(i)[0]);
    xmax = std::max(xmax, p.dp.x(i)[0]);
  }
  for (std::size_t i = 0; i < p.dq_train.size(); ++i) {
    xmin = std::min(xmin, p.dq_train.x(i)[0]);
    xmax = std::max(xmax, p.dq_train.x(i)[0]);
  }
  CHECK(xmin == 0.0);
  CHECK(xmax == 1.0);
  // Same affine map for source and target.
  CHECK(p.dp.x(0)[0] == doctest::Approx(p.map(white.rows[0][1])));
  CHECK(p.dq_train.x(0)[0] == doctest::Approx(p.map(red.rows[p.train_rows[0]][1])));

  const auto again = prepare(red, white, cfg, 9, 100);
  CHECK(again.train_rows == p.train_rows);
  CHECK(prepare(red, white, cfg, 10, 100).train_rows != p.train_rows);
}

TEST_CASE("prepare errors") {
  auto red = wine_like(50, 1, 0.0), white = wine_like(50, 2, 0.0);
  WineConfig cfg;
  CHECK_THROWS(prepare(red, white, cfg, 1, 50));
  CHECK_NOTHROW(prepare(red, white, cfg, 1, 49));
  cfg.feature = "sulphates";
  CHECK_THROWS(prepare(red, white, cfg, 1, 10));
  cfg.feature = "alcohol";
  for (auto& r : red.rows) r[1] = 10.0;
  for (auto& r : white.rows) r[1] = 10.0;
  CHECK_THROWS(prepare(red, white, cfg, 1, 10));
}

TEST_CASE("run_wine is deterministic and covers the grid") {
  const auto red = wine_like(400, 3, 0.3), white = wine_like(800, 4, 0.0);
  WineConfig cfg;
  cfg.n_q_grid = {100, 200};
  const auto a = run_wine(red, white, cfg, 5, 2);
  const auto b = run_wine(red, white, cfg, 5, 2);
  CHECK(a.rows().size() == 8);
  for (std::size_t i = 0; i < a.rows().size(); ++i) CHECK(a.rows()[i].mse == b.rows()[i].mse);
  CHECK(a.aggregate().size() == 4);

  RawTable empty_white;
  empty_white.columns = white.columns;
  cfg.n_q_grid = {100};
  const auto c = run_wine(red, empty_white, cfg, 5, 1);
  CHECK(c.rows().size() == 2);
}
