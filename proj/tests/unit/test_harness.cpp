#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/harness.hpp"
#include "calderon/mesh.hpp"
#include "calderon/report.hpp"
#include "calderon/stats.hpp"

using namespace calderon;
using namespace calderon::harness;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    validate_config(parse_config_text(text));
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for: " << text);
  return ErrorKind::precondition;
}

}  // namespace

TEST_CASE("linear fit recovers an exact line") {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {3, 5, 7, 9};
  const auto f = stats::linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.points == 4);
  const std::vector<double> same = {1, 1};
  CHECK_THROWS_AS(stats::linear_fit(same, same), Error);
}

TEST_CASE("config parsing") {
  const auto c = parse_config_text(
      "# comment\n"
      "experiment = direct-stability\n"
      "domain = koch:1:1   # trailing comment\n"
      "h = 0.05\n"
      "gamma1 = 1 + t*bump(4*(x^2 + y^2))\n"
      "t = 0.1, 0.2\n"
      "x0 = 0.5, 0\n");
  CHECK(c.experiment == "direct-stability");
  CHECK(c.domain == "koch:1:1");
  CHECK(c.h == doctest::Approx(0.05));
  CHECK(c.t == std::vector<double>{0.1, 0.2});
  REQUIRE(c.x0);
  CHECK(c.x0->x() == doctest::Approx(0.5));
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("config errors are config errors") {
  CHECK(kind_of("experiment = mesh\nbogus = 1\n") == ErrorKind::config);
  CHECK(kind_of("experiment = mesh\nh = 0.1\nh = 0.2\n") == ErrorKind::config);
  CHECK(kind_of("experiment = mesh\nh = abc\n") == ErrorKind::config);
  CHECK(kind_of("experiment = mesh\nh = -1\n") == ErrorKind::config);
  CHECK(kind_of("experiment = teleport\n") == ErrorKind::config);
  CHECK(kind_of("experiment = mesh\nno equals sign\n") == ErrorKind::config);
  CHECK(kind_of("experiment = dtn\ngamma = 1 + t\n") == ErrorKind::config);
  CHECK(kind_of("experiment = dtn\nk_min = 3\nk_max = 1\n") == ErrorKind::config);
  CHECK(kind_of("experiment = dtn\ngamma = 1 +\n") == ErrorKind::parse);
  CHECK(kind_of("experiment = dtn\ndomain = blob:1:1\n") == ErrorKind::config);
}

TEST_CASE("config hash ignores output routing") {
  auto a = parse_config_text("experiment = mesh\nh = 0.1\n");
  auto b = parse_config_text("experiment = mesh\nh = 0.1\nout = somewhere.csv\nthreads = 2\n");
  auto c = parse_config_text("experiment = mesh\nh = 0.2\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  auto d = parse_config_text("h = 0.1\nexperiment = mesh\n");
  CHECK(config_hash(a) == config_hash(d));
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorKind::parse) == 1);
  CHECK(exit_code(ErrorKind::config) == 1);
  CHECK(exit_code(ErrorKind::precondition) == 1);
  CHECK(exit_code(ErrorKind::invariant) == 2);
  CHECK(exit_code(ErrorKind::ellipticity) == 2);
  CHECK(exit_code(ErrorKind::coercivity) == 2);
  CHECK(exit_code(ErrorKind::geometry) == 2);
  CHECK(exit_code(ErrorKind::corkscrew) == 2);
  CHECK(exit_code(ErrorKind::solver) == 3);
  CHECK(exit_code(ErrorKind::iteration) == 3);
  CHECK(exit_code(ErrorKind::meshing) == 3);
}

TEST_CASE("report CSV layout") {
  report::ExperimentReport r;
  r.kind = "demo";
  r.columns = {"a", "b"};
  r.add_meta("domain", "square");
  r.add_summary("slope", 1.5);
  r.warnings.push_back("careful");
  r.add_row({1.0, 0.25});
  CHECK_THROWS_AS(r.add_row({1.0}), Error);
  CHECK(r.column("b") == std::vector<double>{0.25});
  CHECK(r.summary_value("slope") == 1.5);
  CHECK_FALSE(r.summary_value("nope"));
  std::ostringstream os;
  r.write_csv(os);
  CHECK(os.str() == std::string("# meta: version=") + report::version() +
                        "\n# meta: experiment=demo\n# meta: domain=square\n# meta: summary.slope=1.5\n"
                        "# warning: careful\na,b\n1,0.25\n");
  CHECK(report::format_double(0.1) == "0.1");
}

TEST_CASE("golden records round trip and detect drift") {
  auto cfg = parse_config_text("experiment = mesh\ndomain = square\nh = 0.2\n");
  const auto rep = run_experiment(cfg);
  const auto g = make_golden(rep, cfg);
  std::stringstream ss;
  write_golden(ss, g);
  const auto back = read_golden(ss);
  CHECK(back.config_hash == g.config_hash);
  REQUIRE(back.entries.size() == g.entries.size());
  CHECK(compare_golden(back, rep).empty());
  auto drifted = back;
  drifted.entries.front().value *= 1.01;
  CHECK(compare_golden(drifted, rep).size() == 1);
  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(read_golden(bad), Error);
}

TEST_CASE("mesh experiment writes a readable artifact") {
  auto cfg = parse_config_text("experiment = mesh\ndomain = koch:1:1\nh = 0.1\n");
  std::stringstream artifact;
  const auto rep = run_experiment(cfg, &artifact);
  const auto m = read_mesh(artifact);
  CHECK(m.num_vertices() > 0);
  CHECK(rep.summary_value("min_angle").value_or(0.0) >= 20.0);
}
