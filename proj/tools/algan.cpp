// Copyright 2026 The ALGAN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// algan: train, score, evaluate and compare anomaly detectors from the shell.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "algan/commands.hpp"
#include "algan/errors.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

std::string kebab(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return key;
}

struct Options {
  std::string config_file;
  std::map<std::string, std::string> flags;
};

// One --kebab-case option per RunConfig key.
void add_config_options(CLI::App& cmd, Options& opts) {
  cmd.add_option("-c,--config", opts.config_file, "key=value config file");
  for (const auto& key : algan::run_config_keys()) {
    cmd.add_option_function<std::string>(
        "--" + kebab(key), [&opts, key](const std::string& v) { opts.flags[key] = v; },
        algan::help_for(key));
  }
}

algan::RunConfig resolve(const Options& opts) {
  const std::filesystem::path file(opts.config_file);
  return algan::resolve_run_config(opts.config_file.empty() ? nullptr : &file, opts.flags,
                                   std::getenv("ALGAN_SEED"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GAN-based time series anomaly detection with attention-adjusted LSTMs"};
  app.require_subcommand(1);
  app.footer("Precedence: flags > config file > ALGAN_SEED (seed only) > defaults.\n"
             "Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric divergence, 1 other failure.");

  Options train_opts, score_opts, eval_opts, compare_opts, synth_opts;
  auto* train = app.add_subcommand("train", "train a generator/discriminator pair");
  add_config_options(*train, train_opts);
  auto* score = app.add_subcommand("score", "score a series with a trained checkpoint");
  add_config_options(*score, score_opts);
  auto* eval = app.add_subcommand("eval", "evaluate a score CSV against labels");
  add_config_options(*eval, eval_opts);
  auto* compare = app.add_subcommand("compare", "train and evaluate alstm vs plain_lstm");
  add_config_options(*compare, compare_opts);
  std::string against_file;
  bool force = false;
  compare->add_option("--against", against_file, "config file for the plain_lstm run");
  compare->add_flag("--force", force, "compare even if the configs differ beyond the variant");
  auto* synth = app.add_subcommand("synth", "generate a labelled synthetic series");
  add_config_options(*synth, synth_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (train->parsed()) {
      algan::cmd_train(resolve(train_opts), std::cout);
    } else if (score->parsed()) {
      algan::cmd_score(resolve(score_opts), std::cout);
    } else if (eval->parsed()) {
      algan::cmd_eval(resolve(eval_opts), std::cout);
    } else if (compare->parsed()) {
      const algan::RunConfig config = resolve(compare_opts);
      std::optional<algan::RunConfig> against;
      if (!against_file.empty()) {
        Options other = compare_opts;
        other.config_file = against_file;
        against = resolve(other);
      }
      algan::cmd_compare(config, against ? &*against : nullptr, force, std::cout);
    } else if (synth->parsed()) {
      algan::cmd_synth(resolve(synth_opts), std::cout);
    }
  } catch (const algan::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const algan::DivergenceError& e) {
    std::cerr << "numeric divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const algan::Error& e) {
    // config, dimension and contract errors all come from bad settings
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return 0;
}
