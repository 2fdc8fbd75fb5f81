#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gammaflow {

// Scenario = flat dotted-key/value text, one binding per line, '#' comments.
struct Scenario {
  std::map<std::string, std::string> values;

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;

  // Sorted key=value lines; the manifest hash input.
  std::string canonical_text() const;
  // Canonical text with refinement/output keys removed; runs differing only
  // in those stay comparable.
  std::string base_text() const;
};

class ScenarioParseError : public std::runtime_error {
 public:
  ScenarioParseError(const std::string& msg, int line, int col)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ")"),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int column() const { return col_; }

 private:
  int line_, col_;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

// Executes a scenario: trajectory CSV, diagnostics JSON and a deterministic
// manifest under output.dir (wall time goes to run.log, not the manifest).
// Exit semantics: 0 ok, 2 usage/parse, 3 runtime invariant failure
// (truncated artifacts are still written).
int run_scenario(const Scenario& scenario);
int run_scenario_file(const std::string& path);

struct CompareEntry {
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double ratio = 0.0;
};

struct CompareReport {
  bool compatible = false;
  std::string reason;
  std::vector<std::string> overridden_keys;
  std::map<std::string, CompareEntry> entries;

  std::string to_json() const;
};

// Diffs two manifests produced by run_scenario. Refuses scenarios that do
// not match after removing refinement/output overrides.
CompareReport compare_runs(const std::string& manifest_a,
                           const std::string& manifest_b);

// Runs scenarios concurrently; worker count capped by GAMMAFLOW_THREADS.
// Returns the worst exit code.
int sweep(const std::vector<std::string>& scenario_paths);

}  // namespace gammaflow
