#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mckv/experiment/commands.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> mode;
  std::string suite = "all";
};

// Command-line overrides go through the canonical JSON so they are
// validated exactly like file settings.
mckv::ExperimentConfig effective_config(const Options& o) {
  nlohmann::json j = mckv::to_json(mckv::load_config(o.config));
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["output"]["dir"] = *o.out;
  if (o.mode) j["constants"]["mode"] = *o.mode;
  return mckv::parse_config(j);
}

int run(const std::string& cmd, const Options& o) {
  const mckv::ExperimentConfig cfg = effective_config(o);
  const std::filesystem::path out = cfg.output_dir;
  std::filesystem::create_directories(out);
  mckv::CommandResult res;
  if (cmd == "simulate") res = mckv::cmd_simulate(cfg, out);
  else if (cmd == "verify") res = mckv::cmd_verify(cfg, o.suite, out);
  else if (cmd == "recover") res = mckv::cmd_recover(cfg, out);
  else if (cmd == "gradcheck") res = mckv::cmd_gradcheck(cfg, out);
  else if (cmd == "stability") res = mckv::cmd_stability(cfg, out);
  else if (cmd == "sample") res = mckv::cmd_sample(cfg, out);
  std::cout << res.report.dump(2) << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"McKean-Vlasov interaction-potential inference"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override the master seed");
    sub->add_option("--out", o.out, "override the output directory");
    sub->add_option("--mode", o.mode, "strict | experimental")->check(CLI::IsMember({"strict", "experimental"}));
  };
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"simulate", "solve the forward problem and write the trajectory"},
      {"verify", "run verification suites"},
      {"recover", "generate data, sample the surrogate posterior, report recovery"},
      {"gradcheck", "likelihood gradient vs finite differences"},
      {"stability", "stability quantities at the truncated truth"},
      {"sample", "run the sampler on the prior or the surrogate posterior"}};
  for (const auto& [name, help] : cmds) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "verify")
      sub->add_option("--suite", o.suite, "gradients | stability | surrogate | sampler | all")
          ->check(CLI::IsMember({"gradients", "stability", "surrogate", "sampler", "all"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse failure is a usage error
    return app.exit(e) == 0 ? mckv::kExitOk : mckv::kExitConfig;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const mckv::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return mckv::kExitNumerical;
  } catch (const mckv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mckv::kExitConfig;
  } catch (const mckv::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return mckv::kExitConfig;
  } catch (const mckv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mckv::kExitConfig;
  }
}
