#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "eegfb/eegfb.h"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::string mode;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "run configuration JSON")->check(CLI::ExistingFile);
  sub->add_option("--seed", flags.seed, "random seed");
  sub->add_option("--out", flags.out, "output directory");
  sub->add_option("--data", flags.data, "data directory");
  sub->add_option("--mode", flags.mode, "band assignment")
      ->check(CLI::IsMember({"paper-literal", "resolution-aware"}));
}

std::optional<std::string> read_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

int run(const std::string& command, const CommonFlags& flags, nlohmann::json overrides) {
  const auto config = read_config(flags.config);
  if (!flags.config.empty() && !config) {
    std::cerr << "eegfb " << command << ": cannot read config " << flags.config << "\n";
    return 2;
  }
  if (flags.seed) overrides["seed"] = *flags.seed;
  if (!flags.out.empty()) overrides["out"] = flags.out;
  if (!flags.data.empty()) overrides["data"] = flags.data;
  if (!flags.mode.empty()) overrides["mode"] = flags.mode;

  char* result = nullptr;
  const auto status =
      eegfb_run_command(command.c_str(), config ? config->c_str() : nullptr, overrides.dump().c_str(), &result);
  if (status != EEGFB_OK) {
    std::cerr << "eegfb " << command << ": " << eegfb_last_error() << "\n";
    return eegfb_exit_code(status);
  }
  const auto parsed = nlohmann::json::parse(result);
  eegfb_string_free(result);
  for (const auto& w : parsed["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  for (const auto& o : parsed["outputs"]) std::cout << o.get<std::string>() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG relevance feedback toolkit"};
  app.set_version_flag("--version", std::string(eegfb_version()));
  app.require_subcommand(1);

  CommonFlags flags;
  std::string labels, feedback;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"preprocess", "filter, resample and re-reference raw recordings"},
      {"extract", "compute spectral order-statistic features"},
      {"train", "fit the feature-selected classifier"},
      {"predict", "label paragraphs with the trained model"},
      {"rerank", "replay explicit feedback through the re-ranker"},
      {"simulate", "replay logged sessions under each feedback strategy"},
      {"report", "write the strategy and arm tables"},
      {"synth", "generate a synthetic study"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, flags);
    if (std::string(s.name) == "rerank") {
      sub->add_option("--labels", labels, "task label file")->required()->check(CLI::ExistingFile);
      sub->add_option("--feedback", feedback, "feedback JSONL")->required()->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto* chosen = app.get_subcommands().front();
  nlohmann::json overrides = nlohmann::json::object();
  if (chosen->get_name() == "rerank") {
    overrides["labels"] = labels;
    overrides["feedback"] = feedback;
  }
  return run(chosen->get_name(), flags, overrides);
}
