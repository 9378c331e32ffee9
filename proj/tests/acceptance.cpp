// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "klab/report.hpp"
#include "klab/suites.hpp"

using namespace klab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::string note;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs the suites, failing checks and a runtime budget (<= 0: none) into one outcome.
Outcome run_suites(const std::vector<std::string>& names, const SuiteOptions& o, double budget) {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream fails;
  int checks = 0;
  for (const auto& n : names) {
    try {
      const auto rep = run_suite(n, o);
      for (const auto& c : rep.checks) {
        ++checks;
        if (!c.passed) {
          out.passed = false;
          fails << " " << n << "/" << c.name << " measured " << c.measured << " tol " << c.tolerance << ";";
        }
      }
    } catch (const std::exception& e) {
      out.passed = false;
      fails << " " << n << " threw: " << e.what() << ";";
    }
  }
  const double dt = seconds_since(t0);
  std::ostringstream note;
  note.precision(3);
  note << checks << " checks, " << dt << " s";
  if (budget > 0.0) {
    note << " (budget " << budget << " s)";
    if (dt > budget) out.passed = false;
  }
  out.note = note.str() + fails.str();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `suite --all --seed 42` twice into fresh directories; exit 0 and identical files.
Outcome reproducibility(const std::string& cli) {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / ("klab-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = root / ("run" + std::to_string(k));
    const std::string cmd = "\"" + cli + "\" suite --all --seed 42 --quiet --out \"" + dir.string() + "\"";
    const int st = std::system(cmd.c_str());
    codes[k] = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }
  std::vector<std::string> files;
  bool same = true;
  for (const auto& e : fs::directory_iterator(root / "run0")) {
    const auto name = e.path().filename();
    files.push_back(name.string());
    if (!fs::exists(root / "run1" / name) || slurp(e.path()) != slurp(root / "run1" / name)) same = false;
  }
  std::size_t n1 = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "run1")) ++n1;
  same = same && n1 == files.size() && !files.empty();
  fs::remove_all(root);
  out.passed = codes[0] == 0 && codes[1] == 0 && same;
  out.note = "exit codes " + std::to_string(codes[0]) + "," + std::to_string(codes[1]) + "; " +
             std::to_string(files.size()) + " files " + (same ? "byte-identical" : "DIFFER");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = KLAB_CLI_PATH;
  if (argc > 1) cli = argv[1];
  SuiteOptions o;
  o.seed = 42;

  struct Criterion {
    int id;
    std::string title;
    Outcome outcome;
  };
  std::vector<Criterion> rows;
  auto report = [&](int id, const std::string& title, Outcome oc) {
    std::cout << "[" << (oc.passed ? "PASS" : "FAIL") << "] criterion " << id << ": " << title << " -- " << oc.note
              << std::endl;
    rows.push_back({id, title, oc});
  };

  report(1, "block determinant and Hessian bound", run_suites({"hermitian"}, o, 10.0));
  report(2, "curve densities", run_suites({"density"}, o, 60.0));
  report(3, "means, r dM/dr identity, log r convexity", run_suites({"mean-convexity"}, o, 0.0));
  report(4, "harmonic map energy", run_suites({"harmonic-map"}, o, 0.0));
  report(5, "flow engine", run_suites({"heatflow", "krflow", "lichnerowicz"}, o, 0.0));
  report(6, "LYH inequality scans", run_suites({"lyh"}, o, 0.0));
  report(7, "equality and soliton cases", run_suites({"soliton"}, o, 0.0));
  report(8, "parabolic monotonicity", run_suites({"parabolic"}, o, 0.0));
  report(9, "Harnack probe", run_suites({"harnack"}, o, 180.0));
  report(10, "reproducible suite run", reproducibility(cli));

  int failed = 0;
  for (const auto& r : rows) failed += !r.outcome.passed;
  std::cout << (rows.size() - failed) << "/" << rows.size() << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
