#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

// Run the installed binary through the shell, capturing the merged output
// stream and the exit code. `env` is a space-separated VAR=value prefix.
CmdResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  fs::create_directories("cli_tmp");
  const fs::path outfile =
      fs::path("cli_tmp") / ("capture" + std::to_string(counter++) + ".txt");
  const std::string cmd = (env.empty() ? "" : env + " ") +
                          std::string(ORBIDUAL_CLI_PATH) + " " + args + " > " +
                          outfile.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult res;
  if (status != -1 && WIFEXITED(status)) res.code = WEXITSTATUS(status);
  std::ifstream in(outfile);
  std::ostringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

fs::path write_json(const std::string& name, const json& j) {
  fs::create_directories("cli_tmp");
  const fs::path p = fs::path("cli_tmp") / name;
  std::ofstream o(p);
  o << j.dump(2) << "\n";
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  json j;
  in >> j;
  return j;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Cheap parameter sets so the suite stays fast.
json quick_duality() {
  return {{"spec_version", 1},
          {"scenario", "lu-weinstein-su2"},
          {"params", {{"T", 0.25}, {"dt", 0.0025}, {"poisson_samples", 5}}},
          {"seed", 7}};
}

}  // namespace

TEST_CASE("scenario listing is populated and machine-readable") {
  const CmdResult plain = run_cli("list-scenarios");
  CHECK(plain.code == 0);
  CHECK(plain.out.find("rigidbody-pendulum") != std::string::npos);
  CHECK(plain.out.find("lu-weinstein-su2") != std::string::npos);
  CHECK(plain.out.find("monodromic-string") != std::string::npos);

  const CmdResult as_json = run_cli("list-scenarios --json");
  CHECK(as_json.code == 0);
  const json arr = json::parse(as_json.out);
  REQUIRE(arr.is_array());
  CHECK(arr.size() >= 3);
  for (const json& e : arr) {
    CHECK(e.contains("name"));
    CHECK(e.contains("description"));
    CHECK(e.contains("base"));
  }
}

TEST_CASE("a scenario run writes a passing report with sane artifacts") {
  const fs::path cfg = write_json(
      "rigid.json", {{"spec_version", 1},
                     {"scenario", "rigidbody-pendulum"},
                     {"params", {{"T", 0.5}}},
                     {"output_dir", "cli_tmp/rigid_out"},
                     {"seed", 3}});
  const CmdResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS rigidbody-pendulum") != std::string::npos);

  const json rep = read_json("cli_tmp/rigid_out/report.json");
  CHECK(rep.at("spec_version") == 1);
  CHECK(rep.at("scenario") == "rigidbody-pendulum");
  CHECK(rep.at("pass") == true);
  REQUIRE(rep.at("metrics").is_object());
  REQUIRE(rep.at("tolerances").is_object());

  // The exit-code invariant: pass holds exactly when every gated metric sits
  // within its tolerance.
  bool all_within = true;
  for (const auto& [key, tol] : rep.at("tolerances").items()) {
    REQUIRE(rep.at("metrics").contains(key));
    if (!(rep.at("metrics").at(key).get<double>() <= tol.get<double>()))
      all_within = false;
  }
  CHECK(all_within == rep.at("pass").get<bool>());

  // CSV artifacts: mandatory header rows, comma separation, '.' decimals.
  const std::string rb = read_text("cli_tmp/rigid_out/rigid_body.csv");
  CHECK(rb.rfind("t,b1,b2,b3,b1_transport,b2_transport,b3_transport,"
                 "invariant\n",
                 0) == 0);
  const std::string ps = read_text("cli_tmp/rigid_out/pendulum_shared.csv");
  CHECK(ps.rfind("t,theta,p\n", 0) == 0);
  const std::string line = ps.substr(ps.find('\n') + 1,
                                     ps.find('\n', ps.find('\n') + 1) -
                                         ps.find('\n') - 1);
  CHECK(line.find('.') != std::string::npos);
  CHECK(line.find(';') == std::string::npos);
  for (const char* need :
       {"rigid_body.csv", "pendulum_shared.csv", "pendulum_direct.csv"})
    CHECK(fs::exists(fs::path("cli_tmp/rigid_out") / need));
}

TEST_CASE("usage errors exit with code 2 and print the schema") {
  const fs::path unknown = write_json(
      "unknown.json", {{"spec_version", 1}, {"scenario", "no-such-thing"}});
  const CmdResult r1 = run_cli("run " + unknown.string());
  CHECK(r1.code == 2);
  CHECK(r1.out.find("unknown scenario") != std::string::npos);
  CHECK(r1.out.find("spec_version") != std::string::npos);  // schema dump

  const fs::path unversioned =
      write_json("unversioned.json", {{"scenario", "rigidbody-pendulum"}});
  const CmdResult r2 = run_cli("run " + unversioned.string());
  CHECK(r2.code == 2);
  CHECK(r2.out.find("spec_version") != std::string::npos);

  const fs::path badparam = write_json(
      "badparam.json", {{"spec_version", 1},
                        {"scenario", "rigidbody-pendulum"},
                        {"params", {{"bogus", 1}}}});
  const CmdResult r3 = run_cli("run " + badparam.string());
  CHECK(r3.code == 2);
  CHECK(r3.out.find("bogus") != std::string::npos);
  CHECK(r3.out.find("allowed") != std::string::npos);

  const CmdResult r4 = run_cli("");
  CHECK(r4.code == 2);
}

TEST_CASE("unstable decorations run in detection mode") {
  const fs::path cfg = write_json(
      "root.json", {{"spec_version", 1},
                    {"scenario", "lu-weinstein-su2"},
                    {"params",
                     {{"alpha", {0.4, 0.0, 0.0}}, {"poisson_samples", 5}}},
                    {"output_dir", "cli_tmp/root_out"},
                    {"seed", 7}});
  const CmdResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 0);
  const json rep = read_json("cli_tmp/root_out/report.json");
  CHECK(rep.at("pass") == true);
  CHECK(rep.at("metrics").at("condition_residual").get<double>() > 1e-3);
  CHECK(rep.at("metrics").at("poisson_residual").get<double>() > 1e-3);
  CHECK(rep.at("metrics").at("action_refusal_gap").get<double>() == 0.0);
  CHECK(fs::exists("cli_tmp/root_out/detection.csv"));

  // The same decoration admits no two-model report.
  const CmdResult d = run_cli("duality " + cfg.string());
  CHECK(d.code == 1);
  CHECK(d.out.find("unstable") != std::string::npos);
}

TEST_CASE("the duality report carries the residual fields") {
  const fs::path cfg = write_json("dual.json", quick_duality());
  const CmdResult r = run_cli("duality " + cfg.string());
  CHECK(r.code == 0);
  const json rep = json::parse(r.out);
  for (const char* key : {"scenario", "T", "dt", "residual_A", "residual_B",
                          "momentum_drift", "energy_drift"})
    CHECK(rep.contains(key));
  CHECK(rep.at("residual_A").get<double>() < 1e-5);
  CHECK(rep.at("residual_B").get<double>() < 1e-5);

  // A string config has no two-model form: that is a usage mistake.
  const fs::path bad = write_json(
      "dual_bad.json",
      {{"spec_version", 1}, {"scenario", "monodromic-string"}});
  const CmdResult rb = run_cli("duality " + bad.string());
  CHECK(rb.code == 2);
}

TEST_CASE("check suites filter, pass, and fail loudly under defect injection") {
  const CmdResult ext = run_cli("check extension");
  CHECK(ext.code == 0);
  CHECK(ext.out.find("extension") != std::string::npos);
  CHECK(ext.out.find("PASS") != std::string::npos);
  CHECK(ext.out.find("liecore") == std::string::npos);

  const CmdResult none = run_cli("check nomatch");
  CHECK(none.code == 2);
  CHECK(none.out.find("no suite matches") != std::string::npos);

  const CmdResult bad = run_cli("check liecore", "ORBIDUAL_CORRUPT=1");
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL") != std::string::npos);
  CHECK(bad.out.find("validator tripped") != std::string::npos);
  CHECK(bad.out.find("CHECK FAILED") != std::string::npos);
}

TEST_CASE("identical configs and seeds give identical reports") {
  json base = quick_duality();
  base["output_dir"] = "cli_tmp/det_a";
  const fs::path a = write_json("det_a.json", base);
  base["output_dir"] = "cli_tmp/det_b";
  const fs::path b = write_json("det_b.json", base);

  CHECK(run_cli("run " + a.string()).code == 0);
  CHECK(run_cli("run " + b.string()).code == 0);
  CHECK(read_text("cli_tmp/det_a/report.json") ==
        read_text("cli_tmp/det_b/report.json"));

  // The environment seed override takes precedence over the config seed.
  const CmdResult forced = run_cli("run " + a.string(), "ORBIDUAL_SEED=99");
  CHECK(forced.code == 0);
  CHECK(read_json("cli_tmp/det_a/report.json").at("seed") == 99);
  const CmdResult garbled = run_cli("run " + a.string(), "ORBIDUAL_SEED=zzz");
  CHECK(garbled.code == 2);
}

TEST_CASE("batches run concurrently into separate directories") {
  json c1 = {{"spec_version", 1},
             {"scenario", "rigidbody-pendulum"},
             {"params", {{"T", 0.5}}},
             {"output_dir", "cli_tmp/batch_1"},
             {"seed", 1}};
  json c2 = quick_duality();
  c2["output_dir"] = "cli_tmp/batch_2";
  const fs::path p1 = write_json("batch1.json", c1);
  const fs::path p2 = write_json("batch2.json", c2);
  const CmdResult r = run_cli("run " + p1.string() + " " + p2.string());
  CHECK(r.code == 0);
  CHECK(read_json("cli_tmp/batch_1/report.json").at("pass") == true);
  CHECK(read_json("cli_tmp/batch_2/report.json").at("pass") == true);
  // Output arrives in config order even though the runs were concurrent.
  CHECK(r.out.find("rigidbody-pendulum") < r.out.find("lu-weinstein-su2"));
}

TEST_CASE("plugin includes register presets") {
  const fs::path plug = write_json(
      "plug.json",
      {{"scenarios",
        {{{"name", "coarse-string"},
          {"base", "monodromic-string"},
          {"params",
           {{"P", 16}, {"n_max", 3}, {"T", 0.1}, {"dt", 0.005},
            {"enlarged_T", 0.05}}},
          {"description", "coarse collocation preset"}}}}});

  const CmdResult ls = run_cli("list-scenarios --include " + plug.string());
  CHECK(ls.code == 0);
  CHECK(ls.out.find("coarse-string") != std::string::npos);

  const fs::path cfg = write_json(
      "plugged.json", {{"spec_version", 1},
                       {"scenario", "coarse-string"},
                       {"include", plug.string()},
                       {"output_dir", "cli_tmp/plug_out"},
                       {"seed", 5}});
  const CmdResult r = run_cli("run " + cfg.string());
  CHECK(r.code == 0);
  const json rep = read_json("cli_tmp/plug_out/report.json");
  CHECK(rep.at("scenario") == "coarse-string");
  CHECK(rep.at("pass") == true);
  CHECK(fs::exists("cli_tmp/plug_out/chiral_spectrum.csv"));
  CHECK(fs::exists("cli_tmp/plug_out/multiplier.csv"));

  // Presets may not shadow an existing name.
  const fs::path shadow = write_json(
      "shadow.json",
      {{"scenarios",
        {{{"name", "rigidbody-pendulum"}, {"base", "monodromic-string"}}}}});
  const CmdResult bad = run_cli("list-scenarios --include " + shadow.string());
  CHECK(bad.code == 2);
  CHECK(bad.out.find("already registered") != std::string::npos);
}
