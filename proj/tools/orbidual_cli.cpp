/**
 * @file orbidual_cli.cpp
 * @brief Command-line front end: scenario runs, invariant check suites,
 *        two-model reports, and the scenario listing.
 *
 * Exit codes: 0 when everything passed, 1 when a computation ran but failed
 * its gates, 2 for configuration / usage mistakes.
 */
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "orbidual/scenarios.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

const char* const kSchema =
    R"(config schema (a JSON object):
{
  "spec_version": 1,              // required, must equal 1
  "scenario": "<name>",           // required for `run` and `duality`
  "params": { ... },              // optional scenario parameters;
                                  //   "tolerances": {metric: value} overrides gates
  "output_dir": "out/run1",       // optional directory for CSV/JSON artifacts
  "seed": 12345,                  // optional unsigned RNG seed (default 0)
  "include": "extra.json"         // optional plugin file adding scenario presets
}
plugin file schema: {"scenarios": [{"name", "base", "params", "description"}, ...]}
environment: ORBIDUAL_SEED overrides "seed"; ORBIDUAL_CORRUPT=1 makes `check`
exercise a deliberately defective structure-constant table (it must fail loudly).
)";

/// Configuration mistakes; mapped to exit code 2 with the schema printed.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string scenario;
  nlohmann::json params = nlohmann::json::object();
  std::string output_dir;
  std::uint64_t seed = 0;
  std::string include;
};

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(path + " is not valid JSON: " + e.what());
  }
  return j;
}

Config load_config(const std::string& path) {
  const nlohmann::json j = load_json_file(path);
  if (!j.is_object())
    throw UsageError("config " + path + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "spec_version" && k != "scenario" && k != "params" &&
        k != "output_dir" && k != "seed" && k != "include")
      throw UsageError("config " + path + " has an unknown key \"" + k + "\"");
  }
  if (!j.contains("spec_version") ||
      !j.at("spec_version").is_number_integer() ||
      j.at("spec_version").get<int>() != 1)
    throw UsageError("config " + path + " needs \"spec_version\": 1");

  Config c;
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string())
      throw UsageError("\"scenario\" must be a string in " + path);
    c.scenario = j.at("scenario").get<std::string>();
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object())
      throw UsageError("\"params\" must be a JSON object in " + path);
    c.params = j.at("params");
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string())
      throw UsageError("\"output_dir\" must be a string in " + path);
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw UsageError("\"seed\" must be an unsigned integer in " + path);
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("include")) {
    if (!j.at("include").is_string())
      throw UsageError("\"include\" must be a string in " + path);
    c.include = j.at("include").get<std::string>();
  }
  if (const char* env = std::getenv("ORBIDUAL_SEED"); env != nullptr && *env) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw UsageError("ORBIDUAL_SEED must be an unsigned integer, got \"" +
                       std::string(env) + "\"");
    }
  }
  return c;
}

orbidual::ScenarioBook book_for(const std::string& include) {
  orbidual::ScenarioBook book;
  if (!include.empty()) {
    try {
      book.register_from(load_json_file(include));
    } catch (const orbidual::DomainError& e) {
      throw UsageError(std::string("plugin file ") + include + ": " + e.what());
    }
  }
  return book;
}

std::string known_names(const orbidual::ScenarioBook& book) {
  std::string names;
  for (const orbidual::ScenarioInfo& e : book.list())
    names += (names.empty() ? "" : ", ") + e.name;
  return names;
}

nlohmann::json report_json(const orbidual::ScenarioRunResult& r,
                           std::uint64_t seed) {
  nlohmann::json rep;
  rep["spec_version"] = 1;
  rep["scenario"] = r.scenario;
  rep["seed"] = seed;
  rep["pass"] = r.pass;
  rep["metrics"] = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) rep["metrics"][k] = v;
  rep["tolerances"] = nlohmann::json::object();
  for (const auto& [k, v] : r.tolerances) rep["tolerances"][k] = v;
  rep["artifacts"] = r.artifacts;
  return rep;
}

struct RunOutcome {
  int code = kExitPass;
  std::string text;
};

RunOutcome run_one(const std::string& path) {
  RunOutcome out;
  try {
    const Config c = load_config(path);
    if (c.scenario.empty())
      throw UsageError("config " + path +
                       " needs a \"scenario\" name for `run`");
    const orbidual::ScenarioBook book = book_for(c.include);
    if (!book.has(c.scenario))
      throw UsageError("unknown scenario \"" + c.scenario + "\" in " + path +
                       "; registered: " + known_names(book));
    orbidual::ScenarioRunResult r;
    try {
      r = orbidual::run_scenario(book, c.scenario, c.params, c.output_dir,
                                 c.seed);
    } catch (const orbidual::DomainError& e) {
      throw UsageError(e.what());
    }
    const nlohmann::json rep = report_json(r, c.seed);
    if (!c.output_dir.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(c.output_dir);
      std::ofstream rf(fs::path(c.output_dir) / "report.json",
                       std::ios::binary);
      if (!rf)
        throw UsageError("cannot write report.json under " + c.output_dir);
      rf << rep.dump(2) << "\n";
    }
    std::ostringstream os;
    os << rep.dump(2) << "\n"
       << (r.pass ? "PASS" : "FAIL") << " " << r.scenario << "\n";
    out.text = os.str();
    out.code = r.pass ? kExitPass : kExitFail;
  } catch (const UsageError& e) {
    out.code = kExitUsage;
    out.text = std::string("error: ") + e.what() + "\n" + kSchema;
  } catch (const std::exception& e) {
    out.code = kExitFail;
    out.text = std::string("run failed: ") + e.what() + "\n";
  }
  return out;
}

int cmd_run(const std::vector<std::string>& paths) {
  std::vector<RunOutcome> outs(paths.size());
  if (paths.size() == 1) {
    outs[0] = run_one(paths[0]);
  } else {
    // Each config runs on its own thread against its own registry.
    std::vector<std::thread> workers;
    workers.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i)
      workers.emplace_back(
          [&outs, &paths, i] { outs[i] = run_one(paths[i]); });
    for (std::thread& w : workers) w.join();
  }
  int code = kExitPass;
  for (const RunOutcome& o : outs) {
    (o.code == kExitUsage ? std::cerr : std::cout) << o.text;
    code = std::max(code, o.code);
  }
  return code;
}

int cmd_check(const std::string& filter) {
  bool corrupt = false;
  if (const char* env = std::getenv("ORBIDUAL_CORRUPT");
      env != nullptr && *env && std::string(env) != "0")
    corrupt = true;

  std::vector<orbidual::CheckRow> rows;
  try {
    rows = orbidual::run_check_suites(filter, corrupt);
  } catch (const orbidual::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::printf("%-10s  %-48s  %12s  %9s  %s\n", "suite", "check", "residual",
              "tolerance", "status");
  std::size_t failed = 0;
  for (const orbidual::CheckRow& row : rows) {
    std::printf("%-10s  %-48s  %12.4e  %9.1e  %s%s%s\n", row.suite.c_str(),
                row.check.c_str(), row.residual, row.tolerance,
                row.pass ? "PASS" : "FAIL", row.note.empty() ? "" : "  | ",
                row.note.c_str());
    if (!row.pass) ++failed;
  }
  std::printf("%zu checks, %zu failed%s\n", rows.size(), failed,
              corrupt ? " (defect injection active)" : "");
  if (failed > 0) {
    std::printf("CHECK FAILED\n");
    return kExitFail;
  }
  return kExitPass;
}

int cmd_duality(const std::string& path) {
  try {
    const Config c = load_config(path);
    if (c.scenario.empty())
      throw UsageError("config " + path +
                       " needs a \"scenario\" name for `duality`");
    const orbidual::ScenarioBook book = book_for(c.include);
    if (!book.has(c.scenario))
      throw UsageError("unknown scenario \"" + c.scenario + "\" in " + path +
                       "; registered: " + known_names(book));
    nlohmann::json rep;
    try {
      rep = orbidual::duality_report(book, c.scenario, c.params, c.seed);
    } catch (const orbidual::DomainError& e) {
      throw UsageError(e.what());
    } catch (const orbidual::PreconditionError& e) {
      std::cerr << "duality failed: " << e.what() << "\n";
      return kExitFail;
    }
    std::cout << rep.dump(2) << "\n";
    if (!c.output_dir.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(c.output_dir);
      std::ofstream rf(fs::path(c.output_dir) / "duality.json",
                       std::ios::binary);
      if (!rf)
        throw UsageError("cannot write duality.json under " + c.output_dir);
      rf << rep.dump(2) << "\n";
    }
    return kExitPass;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kSchema;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "duality failed: " << e.what() << "\n";
    return kExitFail;
  }
}

int cmd_list(bool as_json, const std::string& include) {
  try {
    const orbidual::ScenarioBook book = book_for(include);
    if (as_json) {
      nlohmann::json arr = nlohmann::json::array();
      for (const orbidual::ScenarioInfo& e : book.list())
        arr.push_back({{"name", e.name},
                       {"description", e.description},
                       {"base", e.base}});
      std::cout << arr.dump(2) << "\n";
    } else {
      for (const orbidual::ScenarioInfo& e : book.list())
        std::cout << e.name << " - " << e.description << "\n";
    }
    return kExitPass;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kSchema;
    return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "orbidual - collective dynamics on double groups: scenario runs, "
      "invariant checks, two-model reports"};
  app.require_subcommand(1);

  std::vector<std::string> run_configs;
  CLI::App* run =
      app.add_subcommand("run",
                         "run scenario configs (several configs run "
                         "concurrently); writes report.json per output_dir");
  run->add_option("configs", run_configs, "JSON config file(s)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string filter;
  CLI::App* check = app.add_subcommand(
      "check", "run the module invariant suites (optionally filtered)");
  check->add_option("filter", filter, "substring filter on suite names");

  std::string dual_config;
  CLI::App* dual = app.add_subcommand(
      "duality", "produce the two-model residual report for a config");
  dual->add_option("config", dual_config, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);

  bool as_json = false;
  std::string include_file;
  CLI::App* ls =
      app.add_subcommand("list-scenarios", "list registered scenarios");
  ls->add_flag("--json", as_json, "print a JSON array");
  ls->add_option("--include", include_file, "plugin preset file")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << kSchema;
    return kExitUsage;
  }

  if (run->parsed()) return cmd_run(run_configs);
  if (check->parsed()) return cmd_check(filter);
  if (dual->parsed()) return cmd_duality(dual_config);
  if (ls->parsed()) return cmd_list(as_json, include_file);
  return kExitUsage;
}
