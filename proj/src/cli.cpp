#include "rlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlab/engine.hpp"
#include "rlab/error.hpp"
#include "rlab/verify.hpp"

namespace rlab {

namespace {

using nlohmann::json;

enum class Kind { uint, integer, real, real_list, text, flag };

struct Key {
  const char* name;
  Kind kind;
  const char* help;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"limit", Kind::uint, "sieve limit N"},
      {"variant", Kind::text, "divisor | circle | piltz"},
      {"k", Kind::integer, "Piltz order"},
      {"X", Kind::real_list, "X value (repeatable)"},
      {"lambda", Kind::real, "prime-count parameter"},
      {"c1", Kind::real, "lower frequency bound factor C1"},
      {"C", Kind::real, "alpha recipe divisor"},
      {"epsilon", Kind::real, "support weight cutoff"},
      {"workers", Kind::uint, "worker threads"},
      {"seed", Kind::uint, "random seed"},
      {"out", Kind::text, "output path"},
      {"cache-dir", Kind::text, "sieve cache directory"},
      {"suite", Kind::text, "arith | series | resonator | kernel | engine | all"},
      {"input", Kind::text, "scan CSV to report on"},
      {"scale", Kind::text, "index | frequency (resonating set selection)"},
      {"dry-run", Kind::flag, "print the resolved configuration and exit"},
  };
  return k;
}

const Key& key(const std::string& name) {
  for (const auto& k : keys()) {
    if (name == k.name) return k;
  }
  fail(ErrorKind::config, "unknown configuration key '" + name + "'");
}

double parse_real(const std::string& name, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) {
    fail(ErrorKind::argument, "--" + name + ": '" + s + "' is not a number");
  }
  return v;
}

json parse_value(const Key& k, const std::vector<std::string>& raw) {
  const std::string name = k.name;
  switch (k.kind) {
    case Kind::flag: return true;
    case Kind::text: return raw.back();
    case Kind::real: return parse_real(name, raw.back());
    case Kind::real_list: {
      json a = json::array();
      for (const auto& s : raw) a.push_back(parse_real(name, s));
      return a;
    }
    case Kind::uint:
    case Kind::integer: {
      const double v = parse_real(name, raw.back());
      if (v != std::floor(v) || std::abs(v) > 9.0e15 || (k.kind == Kind::uint && v < 0)) {
        fail(ErrorKind::argument, "--" + name + ": '" + raw.back() + "' is not a valid integer");
      }
      return k.kind == Kind::uint ? json(static_cast<std::uint64_t>(v))
                                  : json(static_cast<std::int64_t>(v));
    }
  }
  return nullptr;
}

void check_type(const Key& k, const json& v) {
  bool ok = false;
  switch (k.kind) {
    case Kind::flag: ok = v.is_boolean(); break;
    case Kind::text: ok = v.is_string(); break;
    case Kind::real: ok = v.is_number(); break;
    case Kind::real_list:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
      break;
    case Kind::uint: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
    case Kind::integer: ok = v.is_number_integer(); break;
  }
  if (!ok) fail(ErrorKind::config, std::string("config key '") + k.name + "' has the wrong type");
}

// Resolved run configuration: defaults, then the JSON file, then flags.
class RunConfig {
 public:
  explicit RunConfig(json values) : v_(std::move(values)) {}
  const json& values() const { return v_; }
  bool has(const std::string& k) const { return v_.contains(k) && !v_[k].is_null(); }
  double real(const std::string& k) const { return require(k).get<double>(); }
  std::uint64_t uint(const std::string& k) const { return require(k).get<std::uint64_t>(); }
  int integer(const std::string& k) const { return require(k).get<int>(); }
  std::string text(const std::string& k) const { return require(k).get<std::string>(); }
  bool flag(const std::string& k) const { return has(k) && v_[k].get<bool>(); }
  std::vector<double> reals(const std::string& k) const {
    const json& a = require(k);
    return a.is_array() ? a.get<std::vector<double>>() : std::vector<double>{a.get<double>()};
  }

 private:
  const json& require(const std::string& k) const {
    if (!has(k)) fail(ErrorKind::argument, "--" + k + " is required");
    return v_.at(k);
  }
  json v_;
};

struct Command {
  std::string name;
  std::vector<std::string> flags;
  json defaults;
  std::string help;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> c = {
      {"sieve", {"limit", "k", "cache-dir"}, {{"cache-dir", "rlab-cache"}},
       "build or load the cached sieve tables"},
      {"verify", {"suite", "seed", "out"}, {{"suite", "all"}, {"seed", 0}},
       "run the invariant suites and print a JSON summary"},
      {"resonate",
       {"variant", "k", "X", "lambda", "c1", "C", "epsilon", "scale", "seed", "limit", "cache-dir", "out"},
       {{"variant", "divisor"}, {"k", 3}, {"lambda", std::cbrt(16.0)}, {"c1", 1.0}, {"C", 1.0},
        {"epsilon", 1e-6}, {"scale", "index"}, {"seed", 0}},
       "build resonators, supports and predicted bounds for each X"},
      {"scan",
       {"variant", "k", "X", "lambda", "C", "workers", "limit", "cache-dir", "out"},
       {{"variant", "divisor"}, {"k", 3}, {"lambda", std::cbrt(16.0)}, {"C", 1.0}, {"workers", 1}},
       "maximize |F| over the scan window for each X"},
      {"report", {"variant", "k", "input", "out"}, {{"variant", "divisor"}, {"k", 3}},
       "growth report of a scan CSV against the target exponents"},
  };
  return c;
}

SeriesKind parse_variant(const std::string& s) {
  if (s == "divisor") return SeriesKind::divisor;
  if (s == "circle") return SeriesKind::circle;
  if (s == "piltz") return SeriesKind::piltz;
  fail(ErrorKind::argument, "--variant must be divisor, circle or piltz, not '" + s + "'");
}

void validate(const std::string& cmd, const RunConfig& c) {
  auto positive = [&](const char* k) {
    if (c.has(k) && !(c.real(k) > 0.0)) fail(ErrorKind::argument, std::string("--") + k + " must be positive");
  };
  if (c.has("variant")) parse_variant(c.text("variant"));
  const bool piltz = c.has("variant") && c.text("variant") == "piltz";
  if (c.has("k") && piltz && (c.integer("k") < 2 || c.integer("k") > 16)) {
    fail(ErrorKind::argument, "--k must lie in [2, 16]");
  }
  if (cmd == "sieve" && c.has("k") && (c.integer("k") < 2 || c.integer("k") > 16)) {
    fail(ErrorKind::argument, "--k must lie in [2, 16]");
  }
  positive("lambda");
  positive("C");
  if (c.has("c1") && !(c.real("c1") > 0.0 && c.real("c1") < 2.0)) fail(ErrorKind::argument, "--c1 must lie in (0, 2)");
  if (c.has("epsilon") && !(c.real("epsilon") > 0.0 && c.real("epsilon") < 1.0)) {
    fail(ErrorKind::argument, "--epsilon must lie in (0, 1)");
  }
  if (c.has("workers") && (c.uint("workers") < 1 || c.uint("workers") > 256)) {
    fail(ErrorKind::argument, "--workers must lie in [1, 256]");
  }
  if (c.has("limit") && c.uint("limit") < 1) fail(ErrorKind::argument, "--limit must be positive");
  if (c.has("scale") && c.text("scale") != "index" && c.text("scale") != "frequency") {
    fail(ErrorKind::argument, "--scale must be index or frequency");
  }
  if (cmd == "sieve") c.uint("limit");
  if (cmd == "resonate" || cmd == "scan") {
    const auto xs = c.reals("X");
    if (xs.empty()) fail(ErrorKind::argument, "--X is required");
    for (double X : xs) {
      if (!(X > 1.0)) fail(ErrorKind::argument, "--X values must exceed 1");
    }
  }
  if (cmd == "report") c.text("input");
}

std::vector<int> k_list(const RunConfig& c) {
  if (c.has("variant") && c.text("variant") == "piltz") return {c.integer("k")};
  return {};
}

ArithTables tables_for(const RunConfig& c, std::uint64_t needed) {
  const std::uint64_t limit = c.has("limit") ? c.uint("limit") : std::max<std::uint64_t>(needed, 100);
  const auto ks = k_list(c);
  if (c.has("cache-dir")) return load_or_build_tables(c.text("cache-dir"), limit, ks);
  return build_tables(limit, ks);
}

void emit(const RunConfig& c, std::ostream& out, const std::string& text) {
  if (c.has("out")) {
    std::ofstream f(c.text("out"), std::ios::binary);
    if (!f) fail(ErrorKind::config, "cannot write " + c.text("out"));
    f << text;
  } else {
    out << text;
  }
}

int cmd_sieve(const RunConfig& c, std::ostream& out) {
  const std::uint64_t limit = c.uint("limit");
  std::vector<int> ks;
  if (c.has("k") && c.integer("k") > 2) ks.push_back(c.integer("k"));
  const std::filesystem::path dir = c.text("cache-dir");
  const auto tables = load_or_build_tables(dir, limit, ks);
  json j = {{"limit", tables.limit},
            {"k", ks},
            {"path", cache_path(dir, limit, ks).string()}};
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out, const CliHooks& hooks) {
  const std::string suite = c.text("suite");
  const auto& names = suite_names();
  if (suite != "all" && std::find(names.begin(), names.end(), suite) == names.end()) {
    fail(ErrorKind::argument, "--suite must be one of arith, series, resonator, kernel, engine, all");
  }
  VerifyOptions opt;
  opt.seed = c.uint("seed");
  opt.kernel_weight = hooks.kernel_weight;
  const auto tables = verify_tables();
  const auto results = run_verify(suite, opt, tables);
  const json summary = verify_summary(suite, results);
  emit(c, out, summary.dump(2) + "\n");
  return summary["passed"].get<bool>() ? kExitOk : kExitVerification;
}

std::uint64_t spec_terms(SeriesKind v, double X) {
  return truncation_length(X, v == SeriesKind::piltz ? 8.0 / 5.0 : 3.0);
}

ExpSumSpec variant_spec(SeriesKind v, int k, std::uint64_t terms, double alpha,
                        const ArithTables& t) {
  switch (v) {
    case SeriesKind::circle: return circle_series_terms(terms, t);
    case SeriesKind::piltz: return piltz_series_terms(terms, k, alpha, t);
    default: return divisor_series_terms(terms, t);
  }
}

int cmd_resonate(const RunConfig& c, std::ostream& out) {
  const SeriesKind variant = parse_variant(c.text("variant"));
  const int k = c.integer("k");
  const double lambda = c.real("lambda");
  const auto xs = c.reals("X");
  const SelectionScale scale =
      c.text("scale") == "frequency" ? SelectionScale::frequency : SelectionScale::index;

  // Tables must cover 2 alpha for the set, capped so desk runs stay small.
  std::uint64_t needed = 100;
  for (double X : xs) {
    const double alpha = alpha_recipe(X, lambda, c.real("C"), variant);
    double top = 2.0 * alpha;
    if (scale == SelectionScale::frequency) {
      const double s = variant == SeriesKind::divisor ? 4 * std::numbers::pi
                       : variant == SeriesKind::circle ? 2 * std::numbers::pi
                                                       : 2 * std::numbers::pi * k;
      top = std::pow(top / s, variant == SeriesKind::piltz ? k : 2);
    }
    needed = std::max<std::uint64_t>(needed, static_cast<std::uint64_t>(top) + 2);
    needed = std::max<std::uint64_t>(needed, std::min<std::uint64_t>(spec_terms(variant, X), 1000000));
  }
  const auto tables = tables_for(c, needed);

  std::mt19937_64 rng(c.uint("seed"));
  json runs = json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EngineParams p = EngineParams::for_variant(xs[i], variant);
    p.c_param = c.real("C");
    auto choice = choose_resonator(p, lambda, c.real("c1"), variant, tables, k, scale);
    choice.config.support_epsilon = c.real("epsilon");
    const auto support = expand_support(choice.config);

    double worst = 0.0;
    std::uniform_real_distribution<double> ux(-p.y2(), p.y2());
    for (int s = 0; s < 1000; ++s) {
      worst = std::max(worst, std::norm(eval_resonator_product(choice.config, ux(rng))));
    }
    const double I2 = compute_I2(support, p.y2());
    const double i2_bound = std::sqrt(2 * std::numbers::pi) * p.y2() *
                            std::exp(static_cast<double>(choice.config.size()) / 7.0);

    const std::uint64_t full = spec_terms(variant, xs[i]);
    const std::uint64_t terms = std::min<std::uint64_t>(full, tables.limit);
    const auto spec = variant_spec(variant, k, terms, choice.alpha, tables);
    const auto pred = predicted_lower_bound(spec, choice.config, p);

    json r = resonator_json(choice.config);
    r["X"] = xs[i];
    r["C"] = choice.c_param;
    r["M"] = choice.config.size();
    r["estimate_M"] = choice.alpha >= std::exp(std::numbers::e)
                          ? json(estimate_M(choice.alpha, lambda, variant))
                          : json(nullptr);
    r["budget_met"] = choice.budget_met;
    r["bound_hypotheses_hold"] = choice.config.bound_hypotheses_hold();
    r["support"] = {{"epsilon", support.epsilon},
                    {"size", support.size()},
                    {"generation_degree", support.generation_degree},
                    {"tail_bound", support.tail_bound()}};
    r["sup_bound"] = {{"bound", choice.config.sup_bound()}, {"sampled_max", worst}};
    r["I2"] = {{"Y2", p.y2()}, {"value", I2}, {"lower_bound", i2_bound}};
    r["I1_main"] = i1_main_coefficient(spec, choice.config) * I2;
    r["prediction"] = {{"main", pred.main},
                       {"resonator_error", pred.resonator_error},
                       {"tail_error", pred.tail_error},
                       {"premise_holds", pred.premise_holds},
                       {"spec_terms", terms},
                       {"spec_truncated", terms < full}};
    runs.push_back(r);

    if (c.has("out")) {
      std::ofstream f(c.text("out") + ".X" + std::to_string(i) + ".support.csv", std::ios::binary);
      if (!f) fail(ErrorKind::config, "cannot write support CSV next to " + c.text("out"));
      write_support_csv(support, f);
    }
  }
  emit(c, out, json{{"runs", runs}}.dump(2) + "\n");
  return kExitOk;
}

GrowthTarget target_for(SeriesKind v, int k) {
  switch (v) {
    case SeriesKind::circle: return GrowthTarget::circle_stated();
    case SeriesKind::piltz: return GrowthTarget::piltz(k);
    default: return GrowthTarget::divisor();
  }
}

int cmd_scan(const RunConfig& c, std::ostream& out) {
  const SeriesKind variant = parse_variant(c.text("variant"));
  const int k = c.integer("k");
  const auto xs = c.reals("X");
  std::uint64_t needed = 0;
  for (double X : xs) needed = std::max(needed, spec_terms(variant, X));
  const auto tables = tables_for(c, needed);

  std::vector<std::pair<double, ScanResult>> results;
  for (double X : xs) {
    const EngineParams p = EngineParams::for_variant(X, variant);
    const double alpha = variant == SeriesKind::piltz
                             ? alpha_recipe(X, c.real("lambda"), c.real("C"), variant)
                             : 0.0;
    const auto spec = variant_spec(variant, k, spec_terms(variant, X), alpha, tables);
    const auto [lo, hi] = p.scan_window();
    ScanOptions o;
    o.workers = static_cast<unsigned>(c.uint("workers"));
    results.emplace_back(X, scan_max(spec, lo, hi, o));
  }
  std::ostringstream csv;
  write_scan_csv(results, target_for(variant, k), csv);
  emit(c, out, csv.str());
  return kExitOk;
}

std::vector<std::pair<double, ScanResult>> read_scan_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::config, "cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("X,x_star,value,baseline_rms", 0) != 0) {
    fail(ErrorKind::config, path + " is not a scan CSV");
  }
  std::vector<std::pair<double, ScanResult>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() < 4) fail(ErrorKind::config, "malformed scan row: " + line);
    ScanResult r;
    r.x_star = parse_real("input", cells[1]);
    r.value = parse_real("input", cells[2]);
    r.baseline_rms = parse_real("input", cells[3]);
    rows.emplace_back(parse_real("input", cells[0]), r);
  }
  return rows;
}

int cmd_report(const RunConfig& c, std::ostream& out) {
  const SeriesKind variant = parse_variant(c.text("variant"));
  const auto rows = read_scan_csv(c.text("input"));
  std::vector<GrowthTarget> targets;
  if (variant == SeriesKind::circle) {
    targets = {GrowthTarget::circle_stated(), GrowthTarget::circle_derived()};
  } else {
    targets = {target_for(variant, c.integer("k"))};
  }
  json reports = json::array();
  for (const auto& t : targets) reports.push_back(growth_report(rows, t).to_json());
  json j = {{"variant", c.text("variant")}, {"reports", reports}};
  if (variant == SeriesKind::circle) {
    j["note"] = "stated and derived log log exponents for the circle problem differ; both are reported";
  }
  emit(c, out, j.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->kind()) {
      case ErrorKind::range:
      case ErrorKind::capacity:
      case ErrorKind::consistency:
      case ErrorKind::empty_resonator:
        return kExitCapacity;
      default: return kExitArgument;
    }
  }
  return kExitInternal;
}

int run_cli(const std::vector<std::string>& args, const CliHooks& hooks) {
  std::ostream& out = hooks.out ? *hooks.out : std::cout;
  std::ostream& err = hooks.err ? *hooks.err : std::cerr;

  CLI::App app{"Resonance-method experiments on lattice point error terms", "rlab"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::map<std::string, std::vector<std::string>>> raw;
  std::map<std::string, std::string> config_path;
  std::map<std::string, bool> dry_run;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    for (const auto& f : cmd.flags) {
      const Key& k = key(f);
      auto& slot = raw[cmd.name][f];
      if (k.kind == Kind::real_list) {
        sub->add_option("--" + f, slot, k.help)->allow_extra_args(false);
      } else {
        sub->add_option_function<std::string>(
            "--" + f, [&slot](const std::string& s) { slot = {s}; }, k.help);
      }
    }
    sub->add_option("--config", config_path[cmd.name], "JSON file of flag values");
    sub->add_flag("--dry-run", dry_run[cmd.name], "print the resolved configuration and exit");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitArgument;
  }

  std::string name;
  for (const auto& [n, sub] : subs) {
    if (sub->parsed()) name = n;
  }
  const Command& cmd = *std::find_if(commands().begin(), commands().end(),
                                     [&](const Command& c) { return c.name == name; });
  try {
    json values = cmd.defaults;
    if (!config_path[name].empty()) {
      std::ifstream f(config_path[name]);
      if (!f) fail(ErrorKind::config, "cannot read config " + config_path[name]);
      json file;
      try {
        file = json::parse(f);
      } catch (const json::exception& e) {
        fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
      }
      if (!file.is_object()) fail(ErrorKind::config, "config must be a JSON object");
      for (const auto& [k, v] : file.items()) {
        const Key& spec = key(k);
        check_type(spec, v);
        if (k == "dry-run") {
          dry_run[name] = dry_run[name] || v.get<bool>();
        } else if (std::find(cmd.flags.begin(), cmd.flags.end(), k) != cmd.flags.end()) {
          values[k] = v;
        }
      }
    }
    for (const auto& [f, vals] : raw[name]) {
      if (!vals.empty()) values[f] = parse_value(key(f), vals);
    }
    const RunConfig config(values);
    validate(name, config);
    if (dry_run[name]) {
      out << json{{"command", name}, {"config", values}}.dump(2) << "\n";
      return kExitOk;
    }
    if (name == "sieve") return cmd_sieve(config, out);
    if (name == "verify") return cmd_verify(config, out, hooks);
    if (name == "resonate") return cmd_resonate(config, out);
    if (name == "scan") return cmd_scan(config, out);
    return cmd_report(config, out);
  } catch (const json::exception& e) {
    err << "rlab " << name << ": config error: " << e.what() << "\n";
    return kExitArgument;
  } catch (const std::exception& e) {
    const auto* re = dynamic_cast<const Error*>(&e);
    err << "rlab " << name << ": " << (re ? to_string(re->kind()) : "internal") << " error: "
        << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace rlab
