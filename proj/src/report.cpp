#include "klab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "klab/errors.hpp"
#include "klab/kernels.hpp"

namespace klab {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json num_json(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

void SuiteReport::at_most(const std::string& name, const std::string& anchor, double measured, double tolerance) {
  checks.push_back({name, anchor, measured <= tolerance, measured, tolerance, {}});
}

void SuiteReport::at_least(const std::string& name, const std::string& anchor, double measured, double tolerance) {
  checks.push_back({name, anchor, measured >= -tolerance, measured, tolerance, {}});
}

void SuiteReport::flag(const std::string& name, const std::string& anchor, bool ok, const std::string& detail) {
  checks.push_back({name, anchor, ok, ok ? 1.0 : 0.0, 0.0, detail});
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

bool VerificationReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteReport& s) { return s.passed(); });
}

void VerificationReport::normalize() {
  std::stable_sort(suites.begin(), suites.end(), [](const auto& a, const auto& b) { return a.suite < b.suite; });
  for (auto& s : suites)
    std::stable_sort(s.checks.begin(), s.checks.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string environment_fingerprint() {
  std::ostringstream os;
#if defined(__clang__)
  os << "clang-" << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc-" << __GNUC__ << "." << __GNUC_MINOR__;
#else
  os << "unknown-compiler";
#endif
#if defined(__x86_64__)
  os << ";x86_64";
#elif defined(__aarch64__)
  os << ";aarch64";
#else
  os << ";other-arch";
#endif
  os << ";kernels=" << kernels::isa_name(kernels::active_isa()) << ";schema=" << kSchemaVersion;
  return os.str();
}

std::string to_json(const VerificationReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = report.schema;
  j["seed"] = report.seed;
  j["config_hash"] = hex64(fnv1a(report.config));
  j["environment"] = environment_fingerprint();
  j["passed"] = report.passed();
  j["suites"] = nlohmann::ordered_json::array();
  for (const auto& s : report.suites) {
    nlohmann::ordered_json js;
    js["suite"] = s.suite;
    js["passed"] = s.passed();
    js["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : s.checks) {
      nlohmann::ordered_json jc;
      jc["name"] = c.name;
      jc["anchor"] = c.anchor;
      jc["status"] = c.passed ? "pass" : "fail";
      jc["measured"] = num_json(c.measured);
      jc["tolerance"] = num_json(c.tolerance);
      if (!c.detail.empty()) jc["detail"] = c.detail;
      js["checks"].push_back(jc);
    }
    js["series"] = nlohmann::ordered_json::array();
    for (const auto& t : s.series) js["series"].push_back({{"name", t.name}, {"columns", t.columns}});
    j["suites"].push_back(js);
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const Series& series) {
  std::string out;
  for (std::size_t k = 0; k < series.columns.size(); ++k) out += (k ? "," : "") + csv_field(series.columns[k]);
  out += "\n";
  for (const auto& row : series.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + num(row[k]);
    out += "\n";
  }
  return out;
}

std::string checks_csv(const VerificationReport& report) {
  std::string out = "suite,name,anchor,status,measured,tolerance\n";
  for (const auto& s : report.suites)
    for (const auto& c : s.checks)
      out += csv_field(s.suite) + "," + csv_field(c.name) + "," + csv_field(c.anchor) + "," +
             (c.passed ? "pass" : "fail") + "," + num(c.measured) + "," + num(c.tolerance) + "\n";
  return out;
}

std::string summary_text(const VerificationReport& report) {
  std::ostringstream os;
  for (const auto& s : report.suites) {
    os << "[" << (s.passed() ? "PASS" : "FAIL") << "] " << s.suite << "\n";
    for (const auto& c : s.checks) {
      os << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.anchor << ")";
      if (!c.passed) os << " measured " << num(c.measured) << " tolerance " << num(c.tolerance);
      if (!c.detail.empty()) os << " " << c.detail;
      os << "\n";
    }
  }
  return os.str();
}

void write_file(const std::string& dir, const std::string& file, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  const fs::path p = dir.empty() ? fs::path(file) : fs::path(dir) / file;
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
  out.flush();
  if (!out) throw InputError("write failed: " + p.string());
}

}  // namespace klab
