#include <doctest.h>

#include <sstream>

#include "ecpa/errors.hpp"
#include "ecpa/io.hpp"

using namespace ecpa;

TEST_CASE("panel CSV loading") {
  SUBCASE("a well-formed panel with date and extras") {
    std::istringstream in(
        "date,proxy,forecast1,forecast2,spread\n"
        "2001-03-31,1.5,1.2,1.8,0.1\n"
        "2001-06-30,2.5,2.0,2.4,-0.3\n"
        "2001-09-30,0.5,0.7,0.2,0.2\n");
    const EvaluationPanel p = load_panel_csv(in, 1);
    CHECK(p.size() == 3);
    CHECK(p.timestamps.size() == 3);
    CHECK(p.timestamps[1] == "2001-06-30");
    CHECK(p.proxy[0] == 1.5);
    CHECK(p.forecast2[2] == 0.2);
    REQUIRE(p.extras.count("spread") == 1);
    CHECK(p.extras.at("spread")[1] == -0.3);
  }

  SUBCASE("missing required columns are named") {
    std::istringstream in("proxy,forecast1\n1,2\n3,4\n");
    CHECK_THROWS_WITH_AS(load_panel_csv(in, 1),
                         doctest::Contains("forecast2"), DataError);
  }

  SUBCASE("non-numeric cells carry row and column diagnostics") {
    std::istringstream in(
        "proxy,forecast1,forecast2\n1,2,3\n1,abc,3\n1,2,3\n");
    try {
      load_panel_csv(in, 1);
      FAIL("expected DataError");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);
      CHECK(msg.find("forecast1") != std::string::npos);
      CHECK(msg.find("abc") != std::string::npos);
    }
  }

  SUBCASE("non-finite cells are data errors, never dropped") {
    std::istringstream in("proxy,forecast1,forecast2\n1,2,3\nnan,2,3\n");
    CHECK_THROWS_AS(load_panel_csv(in, 1), DataError);
    std::istringstream in2("proxy,forecast1,forecast2\n1,inf,3\n1,2,3\n");
    CHECK_THROWS_AS(load_panel_csv(in2, 1), DataError);
  }

  SUBCASE("ragged rows and short panels are rejected") {
    std::istringstream ragged("proxy,forecast1,forecast2\n1,2\n1,2,3\n");
    CHECK_THROWS_AS(load_panel_csv(ragged, 1), DataError);
    std::istringstream one_row("proxy,forecast1,forecast2\n1,2,3\n");
    CHECK_THROWS_AS(load_panel_csv(one_row, 1), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(load_panel_csv(empty, 1), DataError);
    std::istringstream dup("proxy,proxy,forecast1,forecast2\n1,1,2,3\n");
    CHECK_THROWS_AS(load_panel_csv(dup, 1), DataError);
  }
}

TEST_CASE("run configuration files") {
  SUBCASE("values, comments and defaults") {
    std::istringstream in(
        "# experiment setup\n"
        "loss.kind = qlike\n"
        "tau = 0.10   # looser level\n"
        "grid.zeta = 0.2, 0.5, 1, 2, 5, inf\n"
        "grid.xi = -4,-2,0,2,4\n");
    const RunConfig cfg = RunConfig::parse_stream(in);
    CHECK(cfg.str("loss.kind") == "qlike");
    CHECK(cfg.num("tau") == 0.10);
    CHECK(cfg.str("covariance.weights") == "bartlett");  // default
    CHECK(cfg.integer("horizon") == 1);                  // default
    const auto zetas = cfg.snr_list("grid.zeta");
    REQUIRE(zetas.size() == 6);
    CHECK(zetas[0] == Snr::finite(0.2));
    CHECK(zetas[5] == Snr::infinity());
    const auto xis = cfg.num_list("grid.xi");
    REQUIRE(xis.size() == 5);
    CHECK(xis[0] == -4.0);
  }

  SUBCASE("unknown keys are rejected with the line number") {
    std::istringstream in("loss.kind = se\nlos.kind = se\n");
    CHECK_THROWS_WITH_AS(RunConfig::parse_stream(in),
                         doctest::Contains("line 2"), DataError);
  }

  SUBCASE("malformed lines and values") {
    std::istringstream in("loss.kind se\n");
    CHECK_THROWS_AS(RunConfig::parse_stream(in), DataError);
    RunConfig cfg;
    cfg.set("tau", "not-a-number");
    CHECK_THROWS_AS(cfg.num("tau"), DataError);
    cfg.set("horizon", "1.5");
    CHECK_THROWS_AS(cfg.integer("horizon"), DataError);
    cfg.set("grid.common_random_numbers", "maybe");
    CHECK_THROWS_AS(cfg.flag("grid.common_random_numbers"), DataError);
  }
}

TEST_CASE("instrument mini-language") {
  const auto spec = parse_instruments(
      "constant, proxy(1), lossdiff(2), extra(spread,3), "
      "proxydiff(a,b,1)",
      1);
  REQUIRE(spec.size() == 5);
  CHECK(spec[0].kind == Instrument::Kind::Constant);
  CHECK(spec[1].kind == Instrument::Kind::LaggedProxy);
  CHECK(spec[1].lag == 1);
  CHECK(spec[2].kind == Instrument::Kind::LaggedLossDiff);
  CHECK(spec[2].lag == 2);
  CHECK(spec[3].kind == Instrument::Kind::LaggedExtra);
  CHECK(spec[3].name_a == "spread");
  CHECK(spec[3].lag == 3);
  CHECK(spec[4].kind == Instrument::Kind::LaggedProxyDiff);
  CHECK(spec[4].name_a == "a");
  CHECK(spec[4].name_b == "b");

  SUBCASE("omitted lags pick up the default") {
    const auto defaults = parse_instruments("proxy,lossdiff,extra(z)", 4);
    CHECK(defaults[0].lag == 4);
    CHECK(defaults[1].lag == 4);
    CHECK(defaults[2].lag == 4);
  }

  SUBCASE("malformed terms are usage errors") {
    CHECK_THROWS_AS(parse_instruments("wibble", 1), ArgumentError);
    CHECK_THROWS_AS(parse_instruments("proxy(x)", 1), ArgumentError);
    CHECK_THROWS_AS(parse_instruments("proxydiff(a)", 1), ArgumentError);
    CHECK_THROWS_AS(parse_instruments("constant(1)", 1), ArgumentError);
    CHECK_THROWS_AS(parse_instruments("", 1), ArgumentError);
  }
}

TEST_CASE("numeric CSV loader for proxy files") {
  std::istringstream in(
      "date,gdp_e,gdp_i\n"
      "2001-03-31,1.5,1.4\n"
      "2001-06-30,2.5,2.6\n");
  const CsvColumns csv = load_numeric_csv(in);
  CHECK(csv.rows == 2);
  CHECK(csv.dates.size() == 2);
  REQUIRE(csv.columns.count("gdp_e") == 1);
  CHECK(csv.columns.at("gdp_i")[1] == 2.6);
}
