#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "weaklp/experiments.hpp"
#include "weaklp/quadrature.hpp"

namespace {

int dump_constants(int max_dim, const std::vector<double>& ps) {
  weaklp::CsvTable t{"constants.csv", {"N", "p", "k_closed", "k_quad", "sigma"}, {}};
  for (int dim = 1; dim <= max_dim; ++dim)
    for (double p : ps) {
      weaklp::SphereConstants k = weaklp::k_constant(p, dim);
      t.add(dim, p, k.k, k.k_quadrature, k.sigma);
    }
  std::cout << t.text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-L^p difference quotient experiments"};
  std::string config_path, out_dir = "weaklp-out";
  int workers = 0;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--out", out_dir, "output directory; existing files are never overwritten");
  app.add_option("--workers", workers, "worker threads (results do not depend on it)")
      ->envname("WEAKLP_WORKERS")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("--verbose", verbose, "print every verdict");

  CLI::App* constants = app.add_subcommand("constants", "print k(p, N) and sigma_{N-1} as CSV");
  int max_dim = 3;
  std::vector<double> ps{1, 1.25, 1.5, 2, 3, 4};
  constants->add_option("--max-dim", max_dim, "largest N")->check(CLI::Range(1, 4));
  constants->add_option("--p", ps, "exponents")->check(CLI::Range(1.0, 1e6));
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*constants) return dump_constants(max_dim, ps);
    if (config_path.empty()) {
      std::cerr << "error: --config is required\n";
      return 1;
    }
    weaklp::RunOptions opt;
    opt.workers = workers;
    opt.seed = seed;
    weaklp::ExperimentResult r = weaklp::run_experiment(weaklp::load_config(config_path), opt);
    weaklp::write_outputs(r, out_dir);
    for (const weaklp::Verdict& v : r.verdicts)
      if (verbose || v.status != weaklp::Status::pass)
        std::cerr << weaklp::to_string(v.status) << "  " << v.key << "  measured " << v.measured << "  expected "
                  << v.expected << "  tolerance " << v.tolerance << "\n";
    std::cout << weaklp::to_string(r.status) << " (" << r.verdicts.size() << " verdicts) -> " << out_dir << "\n";
    return weaklp::exit_code(r.status);
  } catch (const weaklp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
