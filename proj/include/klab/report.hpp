#pragma once
// Verification records, JSON/CSV emission and output-file plumbing shared by
// the command-line tool and the acceptance runner.

#include <cstdint>
#include <string>
#include <vector>

namespace klab {

inline constexpr int kSchemaVersion = 1;

struct CheckRecord {
  std::string name;
  std::string anchor;  // which statement of the theory the check exercises
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;  // optional free text
};

// Plot-ready numeric table (e.g. r, theta, err).
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRecord> checks;
  std::vector<Series> series;

  // measured <= tolerance
  void at_most(const std::string& name, const std::string& anchor, double measured, double tolerance);
  // measured >= -tolerance
  void at_least(const std::string& name, const std::string& anchor, double measured, double tolerance);
  void flag(const std::string& name, const std::string& anchor, bool ok, const std::string& detail = {});
  bool passed() const;
};

struct VerificationReport {
  int schema = kSchemaVersion;
  std::uint64_t seed = 0;
  std::string config;  // canonical key=value text of the run configuration
  std::vector<SuiteReport> suites;

  bool passed() const;
  // Sort suites by name and each suite's checks by name.
  void normalize();
};

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

// Compiler, architecture, kernel variant and schema; no host names or clocks.
std::string environment_fingerprint();

std::string to_json(const VerificationReport& report);
std::string to_csv(const Series& series);
// One row per check: suite,name,anchor,status,measured,tolerance.
std::string checks_csv(const VerificationReport& report);

// Human summary: one line per check, failing checks show the gap.
std::string summary_text(const VerificationReport& report);

// Writes `text` to dir/file, creating dir. Throws InputError when the path
// cannot be written.
void write_file(const std::string& dir, const std::string& file, const std::string& text);

}  // namespace klab
