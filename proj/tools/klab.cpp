// klab: command-line front end for the verification suites.
//
// Exit codes: 0 all checks pass, 1 some check failed (or a numerical
// procedure broke down), 2 input or configuration error.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "klab/errors.hpp"
#include "klab/monotonicity.hpp"
#include "klab/report.hpp"
#include "klab/suites.hpp"

using namespace klab;

namespace {

struct RunConfig {
  std::string subcommand;
  std::uint64_t seed = 42;
  std::string out_dir;
  std::string format = "both";
  bool quiet = false;

  // density
  std::string curve = "z2-z1^2";
  std::string center = "0";
  std::string radii = "1e-3:10:40";
  double tol = 1e-6;

  // lyh
  std::string kind = "linear-Z";
  std::string fixture;

  // harnack
  SuiteOptions suite;

  // suite
  bool all = false;
  std::vector<std::string> names;

  std::string canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "subcommand=" << subcommand << "\nseed=" << seed << "\n";
    if (subcommand == "density")
      os << "curve=" << curve << "\ncenter=" << center << "\nradii=" << radii << "\ntol=" << tol << "\n";
    if (subcommand == "lyh") os << "kind=" << kind << "\nfixture=" << fixture << "\ntol=" << tol << "\n";
    if (subcommand == "harnack" || subcommand == "suite")
      os << "m=" << suite.harnack_m << "\ngrid=" << suite.harnack_grid << "\ntrials=" << suite.harnack_trials
         << "\nlambda=" << suite.lambda << "\nLambda=" << suite.Lambda << "\nR=" << suite.R << "\n";
    if (subcommand == "suite") {
      os << "psd-trials=" << suite.psd_trials << "\nall=" << all << "\n";
      for (const auto& n : names) os << "name=" << n << "\n";
    }
    return os.str();
  }
};

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("not a number: '" + item + "'");
    }
  }
  return out;
}

// a:b:n (n log-spaced radii) or a comma list
std::vector<double> parse_radii(const std::string& s) {
  if (s.find(':') == std::string::npos) return parse_list(s);
  std::string t = s;
  for (char& c : t)
    if (c == ':') c = ',';
  const auto v = parse_list(t);
  if (v.size() != 3 || v[2] < 2 || v[2] != std::floor(v[2])) throw InputError("radii: expected a:b:n");
  if (!(v[0] > 0.0) || !(v[1] > v[0])) throw InputError("radii: need 0 < a < b");
  return log_radii(v[0], v[1], static_cast<int>(v[2]));
}

std::string series_file(const std::string& base, const Series& s) { return base + "." + s.name + ".csv"; }

int emit(const RunConfig& cfg, const std::string& base, VerificationReport report) {
  report.seed = cfg.seed;
  report.config = cfg.canonical();
  report.normalize();
  const bool json = cfg.format == "json" || cfg.format == "both";
  const bool csv = cfg.format == "csv" || cfg.format == "both";
  if (json) write_file(cfg.out_dir, base + ".json", to_json(report));
  if (csv) {
    write_file(cfg.out_dir, base + ".checks.csv", checks_csv(report));
    for (const auto& s : report.suites)
      for (const auto& t : s.series) {
        const std::string stem = report.suites.size() > 1 ? base + "." + s.suite : base;
        write_file(cfg.out_dir, series_file(stem, t), to_csv(t));
      }
  }
  if (!cfg.quiet) std::cout << summary_text(report);
  const bool ok = report.passed();
  if (!cfg.quiet) std::cout << (ok ? "all checks passed" : "some checks FAILED") << " (seed " << cfg.seed << ")\n";
  return ok ? 0 : 1;
}

int run(const RunConfig& cfg) {
  VerificationReport rep;
  SuiteOptions o = cfg.suite;
  o.seed = cfg.seed;
  const auto& s = cfg.subcommand;
  if (s == "density") {
    rep.suites.push_back(density_run(cfg.curve, parse_list(cfg.center), parse_radii(cfg.radii), cfg.tol));
  } else if (s == "lyh") {
    if (cfg.fixture.empty()) rep.suites.push_back(suite_lyh(o));
    else rep.suites.push_back(lyh_run(cfg.kind, cfg.fixture, cfg.tol));
  } else if (s == "harnack") {
    rep.suites.push_back(harnack_probe_run(o.harnack_m, o.harnack_grid, o.lambda, o.Lambda, o.R, o.harnack_trials,
                                           o.seed));
  } else if (s == "suite") {
    std::vector<std::string> names = cfg.all ? suite_names() : cfg.names;
    for (const auto& n : names) {
      if (!cfg.quiet) std::cerr << "running " << n << "\n";
      rep.suites.push_back(run_suite(n, o));
    }
  } else {
    rep.suites.push_back(run_suite(s, o));
  }
  return emit(cfg, s, std::move(rep));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"klab: numerical verification of Kahler geometry inequalities"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file: key=value lines, [subcommand] sections; flags override it");

  RunConfig cfg;
  if (const char* env = std::getenv("KLAB_OUT_DIR")) cfg.out_dir = env;
  if (cfg.out_dir.empty()) cfg.out_dir = ".";
  app.add_option("--seed", cfg.seed, "random seed, echoed in every report");
  app.add_option("--out", cfg.out_dir, "output directory (default $KLAB_OUT_DIR or .)");
  app.add_option("--format", cfg.format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  app.add_flag("--quiet", cfg.quiet, "no summary on stdout");

  auto positive = CLI::PositiveNumber;

  auto* density = app.add_subcommand("density", "density Theta(x, r) of an algebraic curve");
  density->add_option("--curve", cfg.curve, "line, node, z2-z1^2, z2^2-z1^3, ...");
  density->add_option("--center", cfg.center, "0, or comma-separated real coordinates");
  density->add_option("--radii", cfg.radii, "a:b:n log-spaced, or a comma list");
  density->add_option("--tol", cfg.tol)->check(positive);

  app.add_subcommand("mean-convexity", "spherical means, r dM/dr identity, log r convexity");
  app.add_subcommand("heatflow", "heat equation steps against closed forms");
  app.add_subcommand("krflow", "Kahler-Ricci flow fixed points and the cigar");
  app.add_subcommand("lichnerowicz", "Lichnerowicz heat flow of h = Ric");
  app.add_subcommand("hermitian-einstein", "Hermitian-Einstein flow on the torus");
  app.add_subcommand("soliton", "equality cases and soliton residuals");
  app.add_subcommand("harmonic-map", "normalized energy of harmonic maps");

  auto* lyh = app.add_subcommand("lyh", "LYH quantity scans");
  lyh->add_option("--kind", cfg.kind, "trace-ricci, trace-kahler, linear-Z, linear-Q, bundle-trace");
  lyh->add_option("--fixture", cfg.fixture, "fixture name; omit for the full LYH suite")
      ->check(CLI::IsMember(lyh_fixtures()));
  lyh->add_option("--tol", cfg.tol)->check(positive);

  auto* harnack = app.add_subcommand("harnack", "Harnack ratio probe for nondivergence operators");
  for (auto* sc : {harnack, app.add_subcommand("suite", "run verification suites")}) {
    sc->add_option("--m", cfg.suite.harnack_m, "complex dimension (1 or 2)")->check(CLI::Range(1, 2));
    sc->add_option("--grid", cfg.suite.harnack_grid, "nodes per axis")->check(CLI::Range(5, 100000));
    sc->add_option("--trials", cfg.suite.harnack_trials)->check(CLI::Range(1, 1000000));
    sc->add_option("--lambda", cfg.suite.lambda)->check(positive);
    sc->add_option("--Lambda", cfg.suite.Lambda)->check(positive);
    sc->add_option("--R", cfg.suite.R)->check(positive);
  }
  auto* suite = app.get_subcommand("suite");
  suite->add_flag("--all", cfg.all, "every suite");
  suite->add_option("--name", cfg.names, "suite name (repeatable)")->check(CLI::IsMember(suite_names()));
  suite->add_option("--psd-trials", cfg.suite.psd_trials)->check(CLI::Range(1, 100000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  if (!(cfg.suite.Lambda >= cfg.suite.lambda)) {
    std::cerr << "error: need Lambda >= lambda\n";
    return 2;
  }

  try {
    return run(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
}
