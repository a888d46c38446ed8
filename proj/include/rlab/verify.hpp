#pragma once

// Executable invariant suites for each module, driven by `rlab verify`.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlab/arith.hpp"
#include "rlab/kernel.hpp"

namespace rlab {

struct CheckGroup {
  explicit CheckGroup(std::string n) : name(std::move(n)) {}

  std::string name;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::vector<std::string> examples;  // first few failure descriptions

  void expect(bool ok, const std::string& what);
};

struct SuiteResult {
  explicit SuiteResult(std::string s) : suite(std::move(s)) {}

  std::string suite;
  std::vector<CheckGroup> groups;
  nlohmann::json extra = nlohmann::json::object();

  std::uint64_t checks() const;
  std::uint64_t failures() const;
  bool passed() const { return failures() == 0; }
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  // Weight used on the exact side of the convolution identity; swapping in a
  // wrong one must make the kernel suite fail.
  WeightFn kernel_weight = &weight;
};

const std::vector<std::string>& suite_names();  // arith, series, resonator, kernel, engine

// Runs one suite by name, or every suite for "all".  Unknown names throw an
// argument error.
std::vector<SuiteResult> run_verify(const std::string& suite, const VerifyOptions& options,
                                    const ArithTables& tables);

// Tables large enough for every suite.
ArithTables verify_tables();

nlohmann::json verify_summary(const std::string& suite, const std::vector<SuiteResult>& results);

}  // namespace rlab
