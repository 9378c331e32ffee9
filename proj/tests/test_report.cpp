#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "klab/errors.hpp"
#include "klab/report.hpp"

using namespace klab;

TEST_CASE("FNV-1a 64-bit reference vectors") {
  CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
  CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
  CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
}

TEST_CASE("records and overall status") {
  SuiteReport s{"b", {}, {}};
  s.at_most("gap", "x", 1e-9, 1e-8);
  s.at_least("min", "x", -2e-6, 1e-6);
  CHECK(s.checks[0].passed);
  CHECK_FALSE(s.checks[1].passed);
  CHECK_FALSE(s.passed());
  VerificationReport r;
  r.suites = {s, SuiteReport{"a", {}, {}}};
  CHECK_FALSE(r.passed());
  r.normalize();
  CHECK(r.suites[0].suite == "a");
  CHECK(r.suites[1].checks[0].name == "gap");
  const auto text = summary_text(r);
  CHECK(text.find("FAIL min (x) measured -1.9999999999999999e-06 tolerance 9.9999999999999995e-07") !=
        std::string::npos);
}

TEST_CASE("JSON carries schema, seed and every check field") {
  VerificationReport r;
  r.seed = 123;
  r.config = "k=v\n";
  SuiteReport s{"s", {}, {}};
  s.at_most("nan", "x", NAN, 1.0);
  s.flag("ok", "y", true, "note");
  r.suites.push_back(s);
  const auto j = nlohmann::json::parse(to_json(r));
  CHECK(j["schema"] == kSchemaVersion);
  CHECK(j["seed"] == 123);
  CHECK(j["config_hash"] == hex64(fnv1a("k=v\n")));
  CHECK(j["suites"][0]["checks"][0]["measured"] == "nan");
  CHECK(j["suites"][0]["checks"][0]["status"] == "fail");
  CHECK(j["suites"][0]["checks"][1]["detail"] == "note");

  const auto empty = nlohmann::json::parse(to_json(VerificationReport{}));
  CHECK(empty["suites"].empty());
  CHECK(empty["passed"] == true);
}

TEST_CASE("CSV output") {
  Series t{"theta", {"r", "theta", "err"}, {{0.1, 1.0, 1e-15}}};
  CHECK(to_csv(t) == "r,theta,err\n0.10000000000000001,1,1.0000000000000001e-15\n");
  VerificationReport r;
  r.suites.push_back(SuiteReport{"s", {{"a,b", "say \"hi\"", true, 1.0, 2.0, {}}}, {}});
  CHECK(checks_csv(r) == "suite,name,anchor,status,measured,tolerance\ns,\"a,b\",\"say \"\"hi\"\"\",pass,1,2\n");
}

TEST_CASE("unwritable paths are input errors") {
  CHECK_THROWS_AS(write_file("/proc/klab-no-such-dir", "x.json", "{}"), InputError);
}
