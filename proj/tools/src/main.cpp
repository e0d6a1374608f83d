#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ggflow: weak KAM solutions and generalized gradient flows on the torus"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  for (const char* name : {"solve", "flow", "classify", "sweep", "lemmas"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (key = value lines)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "random seed (overrides seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const auto cmd = ggflow::cli::parse_command(sub->get_name());
  ggflow::cli::ExperimentConfig cfg;
  try {
    cfg = ggflow::cli::load_config(config_path);
  } catch (const ggflow::cli::UsageError& e) {
    std::cerr << "ggflow: " << e.what() << '\n';
    return 2;
  }
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (sub->count("--seed") > 0) cfg.seed = seed;
  return ggflow::cli::execute(*cmd, cfg, std::cerr);
}
