#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "runner.hpp"

int main(int argc, char** argv) {
  namespace app = demailly::app;

  CLI::App cli{"Continuity-method solver for the Demailly system on line bundle sums over a flat torus"};
  cli.require_subcommand(1);

  std::string config, out, snapshot, axis, values;

  auto* solve = cli.add_subcommand("solve", "March from t=0 to t=1 and write summary, report and snapshots");
  solve->add_option("--config", config, "run configuration (key = value)")->required();
  solve->add_option("--out", out, "output directory (defaults to output.dir)");

  auto* verify = cli.add_subcommand("verify", "Recompute residual and diagnostics of a snapshot");
  verify->add_option("--snapshot", snapshot, "snapshot file")->required();
  verify->add_option("--config", config, "configuration the snapshot was produced with")->required();

  auto* sweep = cli.add_subcommand("sweep", "Repeat solve over one parameter axis");
  sweep->add_option("--config", config, "template configuration")->required();
  sweep->add_option("--axis", axis, "alpha0, lambda, n or degrees")->required();
  sweep->add_option("--values", values, "comma separated values; degree tuples separated by ';'")
      ->required();
  sweep->add_option("--out", out, "output directory (defaults to output.dir)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::kInputError;
  }

  try {
    if (*solve) return app::run_solve(config, out, std::cerr);
    if (*verify) return app::run_verify(snapshot, config, std::cout, std::cerr);
    return app::run_sweep(config, axis, values, out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kInputError;
  }
}
