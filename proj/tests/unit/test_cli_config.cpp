#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "horizon_limit/cli.hpp"

using namespace horizon_limit;
namespace fs = std::filesystem;

namespace {

std::string config_error(const std::vector<std::string>& args, std::optional<std::string> file = std::nullopt) {
  try {
    (void)parse_config(args, file);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("horizon_limit_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(CliConfig, FlagsWithDefaults) {
  const auto cfg = parse_config({"costate", "--problem", "LQ1", "--b", "1.0"});
  EXPECT_EQ(cfg.command, "costate");
  EXPECT_EQ(cfg.problem_id, "LQ1");
  EXPECT_EQ(cfg.params.at("b"), 1.0);
  EXPECT_EQ(cfg.horizons().values(), (std::vector<double>{2, 4, 8, 16, 32, 64}));
  EXPECT_EQ(cfg.ode_tol, 1e-10);
  EXPECT_EQ(cfg.check_tol, 1e-6);
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_TRUE(cfg.emit_json);
  EXPECT_TRUE(cfg.emit_csv);
  EXPECT_EQ(cfg.ode().atol, 1e-12);
}

TEST(CliConfig, ExplicitHorizonList) {
  const auto cfg = parse_config({"costate", "--problem", "LQ1", "--tau", "2,4,8"});
  EXPECT_EQ(cfg.horizon_kind, "explicit");
  EXPECT_EQ(cfg.horizons().values(), (std::vector<double>{2, 4, 8}));
  EXPECT_NE(config_error({"costate", "--problem", "LQ1", "--tau", "2,x"}).find("not a number"), std::string::npos);
  EXPECT_FALSE(config_error({"costate", "--problem", "LQ1", "--tau", "4,2"}).empty());
}

TEST(CliConfig, NegativeToleranceIsRejected) {
  const std::string file = "[problem]\nid = \"LQ1\"\n[tolerances]\node = -1\n";
  EXPECT_NE(config_error({"costate"}, file).find("tolerances positive"), std::string::npos);
  EXPECT_NE(config_error({"verify", "--problem", "LQ1", "--check-tol", "0"}).find("tolerances positive: 'check'"),
            std::string::npos);
}

TEST(CliConfig, UnknownKeyIsNamed) {
  EXPECT_NE(config_error({"costate"}, "[problem]\nid = \"LQ1\"\nzeta = 2\n").find("unknown key 'problem.zeta'"),
            std::string::npos);
  EXPECT_NE(config_error({"costate"}, "[nonsense]\nx = 1\n").find("unknown key 'nonsense'"), std::string::npos);
  EXPECT_NE(config_error({"costate", "--problem", "LQ1", "--param", "zeta=1"}).find("unknown key 'zeta'"),
            std::string::npos);
}

TEST(CliConfig, FlagsOverrideFile) {
  const std::string file =
      "[problem]\nid = \"LQ1\"\nb = 2.0\n[horizons]\nkind = \"arithmetic\"\ntau0 = 1\nstep = 1\ncount = 4\n"
      "[tolerances]\ncheck = 1e-5\n[output]\ndir = \"from_file\"\ncsv = false\n";
  const auto file_only = parse_config({"verify"}, file);
  EXPECT_EQ(file_only.params.at("b"), 2.0);
  EXPECT_EQ(file_only.horizons().values(), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_EQ(file_only.check_tol, 1e-5);
  EXPECT_EQ(file_only.out_dir, "from_file");
  EXPECT_FALSE(file_only.emit_csv);

  const auto both = parse_config({"verify", "--b", "3", "--check-tol", "1e-7", "--out", "flag_dir", "--count", "5"}, file);
  EXPECT_EQ(both.params.at("b"), 3.0);
  EXPECT_EQ(both.check_tol, 1e-7);
  EXPECT_EQ(both.out_dir, "flag_dir");
  EXPECT_EQ(both.horizons().values().size(), 5u);
  EXPECT_EQ(both.horizon_kind, "arithmetic");
}

TEST(CliConfig, CustomAndMissingProblems) {
  EXPECT_NE(config_error({"verify", "--problem", "custom"}).find("catalog problems only"), std::string::npos);
  EXPECT_THROW(parse_config({"verify"}), UsageError);
  EXPECT_THROW(parse_config({}), UsageError);
  EXPECT_THROW(parse_config({"frobnicate", "--problem", "LQ1"}), UsageError);
  EXPECT_THROW(parse_config({"verify", "--problem", "LQ1", "--no-such-flag"}), UsageError);
  EXPECT_NO_THROW(parse_config({"catalog"}));
}

TEST(CliConfig, OtherOptions) {
  const auto cfg = parse_config({"shoot", "--problem", "LQ1", "--bracket=-3,0", "--horizon", "30", "--emit", "json",
                                 "--param", "r=0.5", "--checks", "michel,r_zero"});
  EXPECT_EQ(cfg.psi_lo, -3.0);
  EXPECT_EQ(cfg.psi_hi, 0.0);
  EXPECT_EQ(cfg.horizon, 30.0);
  EXPECT_TRUE(cfg.emit_json);
  EXPECT_FALSE(cfg.emit_csv);
  EXPECT_EQ(cfg.params.at("r"), 0.5);
  EXPECT_EQ(cfg.checks, (std::vector<std::string>{"michel", "r_zero"}));
  EXPECT_FALSE(config_error({"shoot", "--problem", "LQ1", "--bracket=0,-3"}).empty());
  EXPECT_FALSE(config_error({"verify", "--problem", "LQ1", "--checks", "bogus"}).empty());
  EXPECT_FALSE(config_error({"verify", "--problem", "LQ1", "--emit", "xml"}).empty());
  EXPECT_FALSE(config_error({"verify", "--problem", "LQ1", "--b", "1,2"}).empty());
}

TEST(CliConfig, OracleSection) {
  const auto cfg = parse_config({"oracle"}, "[problem]\nid = \"LQ1\"\n[oracle]\nT = 4\nN = 100\nseed = 3\nrestarts = 2\n");
  EXPECT_EQ(cfg.oracle_T, 4.0);
  EXPECT_EQ(cfg.oracle_N, 100);
  EXPECT_EQ(cfg.seed, 3u);
  EXPECT_EQ(cfg.restarts, 2);
  EXPECT_NE(config_error({"oracle"}, "[problem]\nid = \"LQ1\"\n[oracle]\nN = 1.5\n").find("integer"), std::string::npos);
}

TEST(CliConfig, ShippedConfigsParse) {
  for (const auto& entry : fs::directory_iterator(fs::path(HORIZON_LIMIT_SOURCE_DIR) / "configs")) {
    if (entry.path().extension() != ".toml") continue;
    EXPECT_NO_THROW(parse_config({"verify", "--config", entry.path().string()})) << entry.path();
  }
}

TEST(CliRun, ExitCodes) {
  const auto dir = scratch("exit");
  std::ostringstream os, err;
  EXPECT_EQ(run(parse_config({"verify", "--problem", "LQ1", "--out", dir.string()}), os, err), exit_ok);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "hamiltonian.csv"));
  EXPECT_NE(os.str().find("all applicable checks pass"), std::string::npos);

  // shooting needs r > 0: a computation error, reported in the artifact
  EXPECT_EQ(run(parse_config({"shoot", "--problem", "LQ0", "--out", dir.string()}), os, err), exit_fail);
  const auto j = nlohmann::json::parse(slurp(dir / "shoot.json"));
  EXPECT_TRUE(j.contains("error"));

  EXPECT_EQ(run(parse_config({"verify", "--problem", "LQ1", "--param", "r=-1", "--out", dir.string()}), os, err),
            exit_usage);
  EXPECT_EQ(run(parse_config({"catalog"}), os, err), exit_ok);
  fs::remove_all(dir);
}

TEST(CliRun, MainEntry) {
  std::ostringstream os, err;
  const char* help[] = {"horizon-limit", "--help"};
  EXPECT_EQ(main_entry(2, const_cast<char**>(help), os, err), exit_ok);
  EXPECT_NE(os.str().find("--problem"), std::string::npos);
  const char* missing[] = {"horizon-limit", "verify"};
  EXPECT_EQ(main_entry(2, const_cast<char**>(missing), os, err), exit_usage);
  EXPECT_NE(err.str().find("missing problem"), std::string::npos);
}

TEST(CliRun, ArtifactsAreReproducible) {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  std::ostringstream os, err;
  ASSERT_EQ(run(parse_config({"costate", "--problem", "LQ1", "--out", a.string()}), os, err), exit_ok);
  ASSERT_EQ(run(parse_config({"costate", "--problem", "LQ1", "--out", b.string()}), os, err), exit_ok);
  for (const char* name : {"horizons.csv", "limiting.json", "costate_trace.csv", "fundamental.csv"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_EQ(slurp(a / "horizons.csv").substr(0, 30), "tau,lambda_n,psi0_1,I_norm\n2,0");
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(CliRun, OracleArtifacts) {
  const auto dir = scratch("oracle");
  std::ostringstream os, err;
  ASSERT_EQ(run(parse_config({"oracle", "--problem", "LQ1", "--N", "100", "--out", dir.string()}), os, err), exit_ok);
  const auto j = nlohmann::json::parse(slurp(dir / "transcription.json"));
  EXPECT_EQ(j["N"], 100);
  EXPECT_EQ(j["status"], "converged");
  fs::remove_all(dir);
}

TEST(CliRun, TabulatedControl) {
  const auto dir = scratch("control");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "u.csv");
    f << "t,u_1\n0,0\n";
  }
  std::ostringstream os, err;
  const auto cfg = parse_config({"verify", "--problem", "CONST1", "--control", (dir / "u.csv").string(), "--out",
                                 (dir / "out").string()});
  EXPECT_EQ(run(cfg, os, err), exit_ok);
  fs::remove_all(dir);
}
