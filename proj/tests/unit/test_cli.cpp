#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "runner.hpp"

using namespace ggflow;
using namespace ggflow::cli;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ggflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(GGFLOW_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesKeys) {
  const ExperimentConfig c = parse(
      "# pendulum\n"
      "potential.name = pendulum\n"
      "solver = laxoleinik   # comment\n"
      "grid.n = 256\n"
      "flow.dt = 5e-4\n"
      "flow.x0 = 0.1, 0.25\n"
      "schedule = 5, 50, 500\n"
      "moments.normalization = unit\n"
      "seed = 7\n");
  EXPECT_EQ(*c.potential_name, "pendulum");
  EXPECT_EQ(c.solver, SolverKind::LaxOleinik);
  EXPECT_EQ(c.grid_n, 256);
  EXPECT_DOUBLE_EQ(c.flow_dt, 5e-4);
  // Points are resolved once the potential's dimension is known.
  const auto x0 = parse_points(c.raw.at("flow.x0"), 1);
  ASSERT_EQ(x0.size(), 2u);
  EXPECT_DOUBLE_EQ(x0[1][0], 0.25);
  EXPECT_EQ(c.schedule, (std::vector<double>{5, 50, 500}));
  EXPECT_EQ(c.moments_norm, MomentDictionary::Normalization::Unit);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.raw.size(), 8u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse("bogus = 1\n"), UsageError);
  EXPECT_THROW(parse("grid.n = 32\n"), UsageError);
  EXPECT_THROW(parse("flow.dt = 0.05\n"), UsageError);
  EXPECT_THROW(parse("schedule = 10, 100\n"), UsageError);
  EXPECT_THROW(parse("schedule = 10, 5, 100\n"), UsageError);
  EXPECT_THROW(parse("grid.n = 128\ngrid.n = 256\n"), UsageError);
  EXPECT_THROW(parse("grid.n\n"), UsageError);
  EXPECT_THROW(parse("grid.n = abc\n"), UsageError);
  EXPECT_THROW(load_config("/nonexistent/file.cfg"), UsageError);
}

TEST(Config, Points) {
  EXPECT_EQ(parse_points("0.1, 0.2;0.3", 1).size(), 3u);
  const auto p2 = parse_points("0.1,0.2; 0.3,0.4", 2);
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_DOUBLE_EQ(p2[1][1], 0.4);
  EXPECT_THROW(parse_points("0.1,0.2,0.3", 2), UsageError);
}

TEST(Command, Names) {
  for (const char* s : {"solve", "flow", "classify", "sweep", "lemmas"}) {
    const auto c = parse_command(s);
    ASSERT_TRUE(c.has_value());
    EXPECT_EQ(to_string(*c), s);
  }
  EXPECT_FALSE(parse_command("plot").has_value());
}

TEST(Execute, ClassifyWritesArtifactsAndManifest) {
  const fs::path dir = scratch("classify");
  ExperimentConfig c = parse("potential.name = pendulum\ngrid.n = 256\nflow.x0 = 0.25, 0\nschedule = 2, 4, 8\n");
  c.output_dir = dir;
  std::ostringstream log;
  ASSERT_EQ(execute(Command::Classify, c, log), 0) << log.str();
  for (const char* f : {"manifest.json", "classification_0.json", "classification_1.json", "classification_table.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_TRUE(m.contains("seed"));
  EXPECT_TRUE(m.contains("config_file"));
  EXPECT_TRUE(m.contains("files"));
  const auto r0 = nlohmann::json::parse(slurp(dir / "classification_0.json"));
  EXPECT_EQ(r0["verdict"], "EntersSingularSet");
  const auto r1 = nlohmann::json::parse(slurp(dir / "classification_1.json"));
  EXPECT_EQ(r1["verdict"], "StationaryCritical");
}

TEST(Execute, Deterministic) {
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = scratch("det" + std::to_string(rep));
    ExperimentConfig c = parse("potential.name = pendulum\ngrid.n = 256\nsweep.count = 8\nsweep.threads = 4\n"
                               "schedule = 2, 4, 8\nlemma.cases = 50\nseed = 11\n");
    c.output_dir = dir;
    std::ostringstream log;
    ASSERT_EQ(execute(Command::Sweep, c, log), 0) << log.str();
    ASSERT_EQ(execute(Command::Lemmas, c, log), 0) << log.str();
    const std::string now = slurp(dir / "classification_table.csv") + slurp(dir / "lemmas.json");
    if (rep == 0) first = now;
    else EXPECT_EQ(first, now);
  }
}

TEST(Execute, UnknownPotentialIsUsage) {
  ExperimentConfig c = parse("potential.name = nothing\ngrid.n = 128\n");
  c.output_dir = scratch("unknown");
  std::ostringstream log;
  EXPECT_EQ(execute(Command::Solve, c, log), 2);
}

TEST(Execute, SolverFailureIsNumerical) {
  const fs::path dir = scratch("fail");
  ExperimentConfig c = parse("potential.name = pendulum\ngrid.n = 128\nsolver = laxoleinik\nsolver.max_iter = 2\n");
  c.output_dir = dir;
  std::ostringstream log;
  EXPECT_EQ(execute(Command::Solve, c, log), 1);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["status"], "failed");
  EXPECT_EQ(m["exit_code"], 1);
}

TEST(Binary, ExitCodes) {
  const fs::path dir = scratch("binary");
  const fs::path cfg = dir / "ok.cfg";
  std::ofstream(cfg) << "potential.name = pendulum\ngrid.n = 128\n";
  EXPECT_EQ(run_binary("solve --config " + cfg.string() + " --out " + (dir / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "manifest.json"));
  EXPECT_EQ(run_binary("solve"), 2);
  EXPECT_EQ(run_binary("frobnicate --config " + cfg.string()), 2);
  EXPECT_EQ(run_binary("solve --config " + (dir / "missing.cfg").string()), 2);
  EXPECT_EQ(run_binary("solve --config " + cfg.string() + " --seed notanumber"), 2);
}
