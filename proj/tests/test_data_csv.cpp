#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "eqdisc/csv.hpp"
#include "eqdisc/data.hpp"
#include "eqdisc/errors.hpp"
#include "eqdisc/simulate.hpp"

using namespace eqdisc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "eqdisc_csv_tests";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

Dataset random_dataset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> s_pick(1, 4), t_pick(5, 24), n_pick(1, 3), c_pick(0, 2);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::uniform_real_distribution<double> mag(-1e6, 1e6);
  const int S = s_pick(rng), T = t_pick(rng), N = n_pick(rng), C = c_pick(rng);

  std::vector<double> times(T), xs(S);
  times[0] = coord(rng);
  for (int t = 1; t < T; ++t) times[t] = times[t - 1] + 0.01 + coord(rng) * 0.1;
  xs[0] = coord(rng);
  for (int s = 1; s < S; ++s) xs[s] = xs[s - 1] + 0.1 + coord(rng);

  const bool spatial = S > 1 || coord(rng) < 0.5;
  Grid grid = spatial ? Grid::spatiotemporal(xs, times) : Grid::temporal(times);

  std::vector<std::string> names, cov_names;
  for (int n = 0; n < N; ++n) names.push_back("u" + std::to_string(n + 1));
  for (int c = 0; c < C; ++c) cov_names.push_back("w" + std::to_string(c + 1));
  const std::size_t cells = grid.num_space() * grid.num_times();
  std::vector<double> values(cells * N), covs(cells * C);
  for (auto& v : values) v = mag(rng) * std::pow(10.0, s_pick(rng) - 3);
  for (auto& v : covs) v = mag(rng);
  return Dataset(grid, names, values, cov_names, covs);
}

}  // namespace

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(Grid::temporal({0.0, 1.0, 2.0}), GeometryError);  // T < 5
  CHECK_THROWS_AS(Grid::temporal({0, 1, 2, 2, 3}), GeometryError);  // not increasing
  CHECK_THROWS_AS(Grid::spatiotemporal({}, {0, 1, 2, 3, 4}), GeometryError);

  Grid g = Grid::temporal({0.0, 0.1, 0.2, 0.3, 0.4});
  CHECK(g.uniform_dt());
  CHECK(g.dt() == doctest::Approx(0.1));
  CHECK(g.num_space() == 1);

  Grid irregular = Grid::temporal({0.0, 0.1, 0.25, 0.3, 0.4});
  CHECK_FALSE(irregular.uniform_dt());
}

TEST_CASE("dataset invariants") {
  Grid g = Grid::temporal({0, 1, 2, 3, 4});
  std::vector<double> vals(5, 1.0);
  CHECK_NOTHROW(Dataset(g, {"u1"}, vals));
  CHECK_THROWS_AS(Dataset(g, {"u1", "u1"}, std::vector<double>(10, 1.0)), SchemaError);
  CHECK_THROWS_AS(Dataset(g, {"u1"}, std::vector<double>(4, 1.0)), SchemaError);  // shape
  std::vector<double> bad = vals;
  bad[2] = std::nan("");
  CHECK_THROWS_AS(Dataset(g, {"u1"}, bad), SchemaError);  // non-finite
  CHECK_THROWS_AS(Dataset(g, {"t"}, vals), SchemaError);  // reserved name
  CHECK_THROWS_AS(Dataset(g, {"bad name"}, vals), SchemaError);
}

TEST_CASE("dataset layout accessors") {
  Grid g = Grid::spatiotemporal({0.0, 1.0}, {0, 1, 2, 3, 4});
  std::vector<double> vals(2 * 5 * 2);
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(i);
  Dataset d(g, {"a", "b"}, vals);
  // value(s,t,n) = values[(n*S + s)*T + t]
  CHECK(d.value(0, 0, 0) == 0.0);
  CHECK(d.value(0, 3, 0) == 3.0);
  CHECK(d.value(1, 0, 0) == 5.0);
  CHECK(d.value(0, 0, 1) == 10.0);
  auto series = d.time_series(1, 1);
  CHECK(series.size() == 5);
  CHECK(series[2] == 17.0);
  auto col = d.component_column(1);
  CHECK(col.size() == 10);
  CHECK(col[0] == 10.0);
}

TEST_CASE("load_csv transcribes a plain file") {
  auto dir = scratch_dir();
  auto path = dir / "plain.csv";
  write_file(path,
             "# comment line\n"
             "t,u1\n"
             "0,1\n"
             "1,2\n"
             "2,3\n"
             "3,4\n"
             "4,5\n");
  Dataset d = load_csv(path);
  CHECK(d.num_space() == 1);
  CHECK(d.num_times() == 5);
  CHECK(d.num_components() == 1);
  CHECK(d.value(0, 0, 0) == 1.0);
  CHECK(d.value(0, 4, 0) == 5.0);
  CHECK_FALSE(d.grid().has_space());
}

TEST_CASE("load_csv error paths") {
  auto dir = scratch_dir();

  auto dup = dir / "dup.csv";
  write_file(dup, "t,u1\n0,1\n1,2\n1,2.5\n2,3\n3,4\n4,5\n");
  CHECK_THROWS_AS(load_csv(dup), GeometryError);

  auto bad_cell = dir / "bad_cell.csv";
  write_file(bad_cell, "t,u1\n0,1\n1,oops\n2,3\n3,4\n4,5\n");
  CHECK_THROWS_WITH_AS(load_csv(bad_cell), doctest::Contains("line 3"), ParseError);

  auto missing = dir / "missing.csv";
  write_file(missing, "time,u1\n0,1\n");
  CHECK_THROWS_AS(load_csv(missing, CsvLayout{"t", {}, {"u1"}, {}}), SchemaError);

  auto incomplete = dir / "incomplete.csv";
  write_file(incomplete,
             "t,x,u1\n0,0,1\n1,0,2\n2,0,3\n3,0,4\n4,0,5\n"
             "0,1,1\n1,1,2\n2,1,3\n3,1,4\n");
  CHECK_THROWS_AS(load_csv(incomplete), GeometryError);

  auto short_file = dir / "short.csv";  // fewer than 5 times
  write_file(short_file, "t,u1\n0,1\n1,2\n2,3\n");
  CHECK_THROWS_AS(load_csv(short_file), GeometryError);
}

TEST_CASE("load_csv sorts rows and accepts shuffled input") {
  auto dir = scratch_dir();
  auto path = dir / "shuffled.csv";
  write_file(path,
             "t,x,u1\n"
             "4,1,45\n0,0,0\n2,1,25\n1,0,1\n3,0,3\n"
             "2,0,2\n0,1,5\n4,0,4\n1,1,15\n3,1,35\n");
  Dataset d = load_csv(path);
  CHECK(d.num_space() == 2);
  CHECK(d.num_times() == 5);
  CHECK(d.value(0, 2, 0) == 2.0);
  CHECK(d.value(1, 2, 0) == 25.0);
}

TEST_CASE("save_csv writes header and rows") {
  auto dir = scratch_dir();
  Grid g = Grid::temporal({0, 1, 2, 3, 4});
  std::vector<double> vals{1.5, 2.5, 3.5, 4.5, 5.5};
  Dataset d(g, {"u1"}, vals);
  auto path = dir / "out.csv";
  save_csv(d, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,u1");
  int rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("csv round-trip is the identity on random datasets") {
  std::mt19937_64 rng(2024);
  auto dir = scratch_dir();
  for (int rep = 0; rep < 25; ++rep) {
    Dataset d = random_dataset(rng);
    auto path = dir / ("roundtrip_" + std::to_string(rep) + ".csv");
    save_csv(d, path);
    CsvLayout layout;
    layout.time_column = "t";
    if (d.grid().has_space()) layout.space_column = "x";
    layout.components = d.component_names();
    layout.covariates = d.covariate_names();
    Dataset back = load_csv(path, layout);
    CHECK(back == d);
  }
}

TEST_CASE("lorenz dataset round-trips bit-exactly") {
  SimSpec spec;
  spec.system = SystemKind::lorenz63;
  spec.initial_state = {-8.0, 7.0, 27.0};
  spec.dt = 0.01;
  spec.n_steps = 200;
  Dataset d = rk4_integrate(spec);
  auto dir = scratch_dir();
  auto path = dir / "lorenz.csv";
  save_csv(d, path);
  CsvLayout layout{"t", {}, d.component_names(), {}};
  Dataset back = load_csv(path, layout);
  CHECK(back == d);
}
