// zygctl: command-line front end for the experiment drivers.
// Exit codes: 0 success, 1 usage or configuration error, 2 I/O error, 3 experiment checks failed.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "zygmund/experiments.hpp"
#include "zygmund/report.hpp"

namespace {

using zyg::ExperimentConfig;
using zyg::ExperimentResult;
using Driver = std::function<ExperimentResult(const ExperimentConfig&)>;

struct Globals {
  std::string seed, caps, out, config;
  std::vector<std::string> sets;
};

// Flags of one subcommand bound to config keys.
struct Bound {
  CLI::App* app = nullptr;
  Driver driver;
  std::map<std::string, std::unique_ptr<std::string>> values;  // config key -> flag value

  void flag(const std::string& name, const std::string& key, const std::string& help) {
    auto& slot = values[key];
    slot = std::make_unique<std::string>();
    app->add_option(name, *slot, help);
  }
};

ExperimentConfig build_config(const Globals& g, const Bound& b) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(g.config);
  if (!g.seed.empty()) c.set("seed", g.seed);
  if (!g.caps.empty()) c.set("caps", g.caps);
  if (!g.out.empty()) c.set("out", g.out);
  for (const auto& [key, value] : b.values)
    if (!value->empty()) c.set(key, *value);
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw zyg::ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return c;
}

// A .csv or .json target is one file; anything else is a directory receiving both formats.
std::vector<std::filesystem::path> emit(const ExperimentResult& r, const std::string& out) {
  const std::filesystem::path p(out);
  if (p.extension() == ".csv" || p.extension() == ".json") {
    zyg::write_report(r, p);
    return {p};
  }
  return {zyg::emit_report(r, zyg::ReportFormat::Csv, p), zyg::emit_report(r, zyg::ReportFormat::Json, p)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zygmund dyadic analysis experiments"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "RNG seed (default 1)");
  app.add_option("--caps", g.caps, "window caps L1,L2; L3 = L1 + L2 (default 3,3)");
  app.add_option("--out", g.out, "output directory, or a .csv/.json file (default results)");
  app.add_option("--config", g.config, "plain-text key=value config file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "extra config entries key=value (repeatable)");

  std::vector<std::unique_ptr<Bound>> bound;
  const auto add = [&](CLI::App* parent, const std::string& name, const std::string& help, Driver d) {
    auto b = std::make_unique<Bound>();
    b->app = parent->add_subcommand(name, help);
    b->app->fallthrough();
    b->driver = std::move(d);
    bound.push_back(std::move(b));
    return bound.back().get();
  };

  add(&app, "decomp", "operator resolution identity", zyg::run_decomposition_identity);
  {
    auto* b = add(&app, "coeff-sweep", "shift-coefficient sweep against phi(k)", zyg::run_shift_coeff_sweep);
    b->flag("--kernel", "kernel", "nw or bump");
    b->flag("--theta", "theta", "kernel decay exponent");
    b->flag("--t", "bump.t", "bump scales t1,t2,t3");
    b->flag("--kmax", "coeff.kmax", "largest complexity per axis");
  }
  {
    auto* b = add(&app, "shift-bench", "weighted shift growth in k3", zyg::run_weighted_shift_bench);
    b->flag("--weights", "weights", "weights separated by ';', each 'flat' or 'g,a,d'");
  }
  {
    auto* b = add(&app, "max-growth", "maximal growth in lambda", zyg::run_maximal_growth);
    b->flag("--weights", "weights", "weights separated by ';', each 'flat' or 'g,a,d'");
    b->flag("--kmax", "max.kmax", "largest log2 lambda");
  }
  {
    auto* b = add(&app, "counterexample", "eccentricity counterexample pipeline", zyg::run_counterexample);
    b->flag("--thetas", "thetas", "comma-separated theta values");
    b->flag("--eta", "eta", "weight family parameter, delta = 3 - 3 eta");
  }
  {
    auto* b = add(&app, "goodness", "goodness probabilities and Monte Carlo", zyg::run_goodness_stats);
    b->flag("--levels", "good.levels", "largest level");
    b->flag("--samples", "good.samples", "Monte Carlo samples");
  }

  auto* op = app.add_subcommand("op", "operator benches");
  op->require_subcommand(1);
  op->fallthrough();
  {
    auto* b = add(op, "shift-bench", "norm of one Zygmund shift on L^2(w)", zyg::run_single_shift_bench);
    b->flag("--k", "shift.k", "complexity k1,k2,k3");
    b->flag("--form", "shift.form", "form 1..4");
    b->flag("--coeff", "shift.coeff", "maximal, sign or random");
    b->flag("--p", "p", "exponent (2 only)");
    b->flag("--weight", "shift.weight", "flat or pw:g,a,d");
  }

  auto* weights = app.add_subcommand("weights", "power-weight tools");
  weights->require_subcommand(1);
  weights->fallthrough();
  {
    auto* b = add(weights, "apz", "A_{p,Z} constant sweep", zyg::run_apz);
    b->flag("--p", "p", "exponent p");
    b->flag("--gamma", "gamma", "gamma");
    b->flag("--alpha", "alpha", "alpha");
    b->flag("--delta", "delta", "delta");
    b->flag("--depth", "depth", "sweep depth");
  }

  auto* kernel = app.add_subcommand("kernel", "kernel certificates");
  kernel->require_subcommand(1);
  kernel->fallthrough();
  {
    auto* b = add(kernel, "check", "sup ratios of the kernel conditions", zyg::run_kernel_check);
    b->flag("--form", "kernel", "nw or bump");
    b->flag("--cond", "cond", "condition name, comma list, or all");
    b->flag("--theta", "theta", "decay exponent");
    b->flag("--t", "bump.t", "bump scales t1,t2,t3");
    b->flag("--samples", "samples", "sample count");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const Bound* chosen = nullptr;
  for (const auto& b : bound)
    if (b->app->parsed()) chosen = b.get();
  if (chosen == nullptr) {
    std::cerr << app.help();
    return 1;
  }

  try {
    const auto config = build_config(g, *chosen);
    const auto result = chosen->driver(config);
    for (const auto& path : emit(result, config.out)) std::cout << "wrote " << path.string() << "\n";
    std::cout << result.summary.dump() << "\n";
    for (const auto& f : result.fits)
      std::cout << "fit " << f.name << ": slope " << f.slope << (f.pass ? " ok" : " FAILED") << "\n";
    for (const auto& f : result.failures) std::cerr << "check failed: " << f << "\n";
    return result.pass() ? 0 : 3;
  } catch (const std::system_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
