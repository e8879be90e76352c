#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"varbif: variational bifurcation analysis on grids"};
  app.require_subcommand(1);
  varbif::cli::RunConfig rc;

  auto common = [&](CLI::App* sub, bool problem) {
    if (problem) {
      sub->add_option("--problem", rc.problem, "builtin problem name");
      sub->add_option("--config", rc.config_path, "problem configuration file");
      sub->add_option("--param", rc.params, "builtin parameter override name=value")->take_all();
      sub->add_option("--resolution", rc.resolution, "cells per axis: n or nx,ny");
      sub->add_option("--window", rc.window, "parameter window a,b");
      sub->add_option("--lambda-star", rc.lambda_star, "candidate value, snapped to the nearest pencil eigenvalue");
      sub->add_option("--grid", rc.grid, "parameter grid a:b:step or a comma list");
    }
    sub->add_option("--out", rc.out, "output directory")->capture_default_str();
    sub->add_option("--format", rc.format, "comma list of csv, json, svg")->capture_default_str();
    sub->add_option("--seed", rc.seed, "seed for randomized probes")->capture_default_str();
    sub->add_option("--workers", rc.workers, "worker threads")->capture_default_str();
  };
  common(app.add_subcommand("sweep", "Morse index and nullity over a parameter grid"), true);
  common(app.add_subcommand("detect", "candidate bifurcation values in a window"), true);
  common(app.add_subcommand("reduce", "kernel basis and reduced functional at lambda*"), true);
  common(app.add_subcommand("branch", "branch search and bifurcation diagram at lambda*"), true);
  common(app.add_subcommand("deform", "conjugate points along the domain contraction"), true);
  common(app.add_subcommand("selftest", "run the acceptance suite"), false);
  common(app.add_subcommand("list-problems", "list builtin problems and their parameters"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return varbif::cli::run(name, rc, std::cout, std::cerr);
}
