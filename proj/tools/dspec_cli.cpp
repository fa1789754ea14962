#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "dspec/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"dichotomy spectra of linear time-varying difference equations"};
  app.require_subcommand(1);

  std::string config_path, output_dir, format;
  long long seed = -1;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "config document (JSON)")->required();
    sub->add_option("--output", output_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "worker thread count");
    sub->add_option("--format", format, "json, csv or both (overrides config)")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    return sub;
  };

  auto* spectrum = add_common(app.add_subcommand("spectrum", "compute the dichotomy spectrum"));
  auto* exponents = add_common(app.add_subcommand("exponents", "estimate the exponents of a subspace"));
  auto* check = add_common(app.add_subcommand("check", "certify a dichotomy splitting"));
  auto* explore = add_common(
      app.add_subcommand("explore-uniformity", "maximal uniformity dimensions across complements"));
  auto* conjecture = add_common(
      app.add_subcommand("conjecture-search", "sweep for complement-dependent uniformity"));

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) Eigen::setNbThreads(threads);

  dspec::RunConfig config;
  try {
    config = dspec::load_config(config_path);
  } catch (const dspec::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return dspec::kExitIo;
  } catch (const dspec::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dspec::kExitConfig;
  }
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (!format.empty()) config.format = format;
  if (seed >= 0) {
    config.seed = static_cast<std::uint64_t>(seed);
    config.budgets.seed = config.seed;
    if (config.conjecture) config.conjecture->seed = config.seed;
  }

  if (spectrum->parsed()) return dspec::cmd_spectrum(config);
  if (exponents->parsed()) return dspec::cmd_exponents(config);
  if (check->parsed()) return dspec::cmd_check(config);
  if (explore->parsed()) return dspec::cmd_explore_uniformity(config);
  if (conjecture->parsed()) return dspec::cmd_conjecture_search(config);
  return dspec::kExitConfig;
}
