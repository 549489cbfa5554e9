/* Copyright 2026 The PhyLSTM Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "phylstm/core/error.hpp"
#include "phylstm/core/parallel.hpp"
#include "phylstm/pipeline/checkpoint.hpp"
#include "phylstm/pipeline/commands.hpp"

namespace {

using namespace phylstm;
using namespace phylstm::pipeline;

constexpr int kExitError = 1;
constexpr int kExitThresholds = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitUsage = 64;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool force = false;
  std::size_t threads = 0;
  std::string model;
  std::string phi;
  std::string data;
  std::string checkpoint;
  std::string predictions;
  std::string role;
  std::optional<std::size_t> trials;
  std::size_t log_every = 100;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--out", o.out, "output directory (defaults to the matching config path)");
  cmd->add_flag("--force", o.force, "replace an output directory written by this tool");
  cmd->add_option("--threads", o.threads, "worker threads (falls back to PHYLSTM_THREADS, then 1)");
}

RunConfig load(const Options& o, const std::string& command) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    if (command == "generate") c.seeds.data = *o.seed;
    else if (command == "select") c.seeds.selection = *o.seed;
    else c.seeds.train = *o.seed;
  }
  if (!o.model.empty()) c.model.kind = model_kind_from_string(o.model);
  if (!o.phi.empty()) c.model.phi = phi_from_string(o.phi);
  if (o.trials) {
    c.data.n_known = *o.trials;
    c.data.n_collocation = *o.trials;
    c.data.n_test = *o.trials;
  }
  if (!o.data.empty()) c.paths.data = o.data;
  if (!o.checkpoint.empty()) c.paths.checkpoint = o.checkpoint;
  if (!o.predictions.empty()) c.paths.predictions = o.predictions;
  c.validate();
  return c;
}

std::string need(const std::string& value, const char* what) {
  require(!value.empty(), std::string("missing ") + what);
  return value;
}

int run(int argc, char** argv) {
  CLI::App app{"Physics-informed multi-LSTM metamodels for structural response"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Options o;

  CLI::App* gen = app.add_subcommand("generate", "simulate a Bouc-Wen dataset");
  add_common(gen, o);
  gen->add_option("--seed", o.seed, "data seed");
  gen->add_option("--trials", o.trials, "records per role (known, collocation and test)");

  CLI::App* sel = app.add_subcommand("select", "cluster response spectra and pick representative records");
  add_common(sel, o);
  sel->add_option("--seed", o.seed, "selection seed");
  sel->add_option("--data", o.data, "dataset directory");
  sel->add_option("--role", o.role, "restrict to one role (train, validation, test, collocation)");

  CLI::App* train = app.add_subcommand("train", "train a PhyLSTM model");
  add_common(train, o);
  train->add_option("--seed", o.seed, "training seed");
  train->add_option("--data", o.data, "dataset directory");
  train->add_option("--model", o.model, "phylstm2 or phylstm3")->check(CLI::IsMember({"phylstm2", "phylstm3"}));
  train->add_option("--phi", o.phi, "full or simplified")->check(CLI::IsMember({"full", "simplified"}));
  train->add_option("--log-every", o.log_every, "epochs between progress lines, 0 disables");

  CLI::App* pred = app.add_subcommand("predict", "run a trained model on dataset records");
  add_common(pred, o);
  pred->add_option("--checkpoint", o.checkpoint, "checkpoint file");
  pred->add_option("--data", o.data, "dataset directory");
  pred->add_option("--role", o.role, "records to predict (default test; 'all' for every record)");

  CLI::App* eval = app.add_subcommand("evaluate", "score predictions against simulator truth");
  add_common(eval, o);
  eval->add_option("--predictions", o.predictions, "prediction directory");
  eval->add_option("--data", o.data, "dataset directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  CommandContext ctx;
  ctx.force = o.force;
  ctx.threads = resolve_threads(o.threads);
  ctx.log = &std::cout;
  ctx.log_every = o.log_every;

  if (gen->parsed()) {
    const RunConfig c = load(o, "generate");
    cmd_generate(c, o.out.empty() ? need(c.paths.data, "--out") : o.out, ctx);
  } else if (sel->parsed()) {
    const RunConfig c = load(o, "select");
    cmd_select(c, need(c.paths.data, "--data"), o.role, need(o.out, "--out"), ctx);
  } else if (train->parsed()) {
    const RunConfig c = load(o, "train");
    const std::string out = o.out.empty() ? need(c.paths.checkpoint, "--out") : o.out;
    const optim::TrainResult r = cmd_train(c, need(c.paths.data, "--data"), out, ctx);
    if (r.status == optim::TrainStatus::Diverged) {
      std::cerr << "error: training diverged: " << r.message << "\n";
      return kExitDiverged;
    }
  } else if (pred->parsed()) {
    const RunConfig c = load(o, "predict");
    std::string role = o.role.empty() ? "test" : o.role;
    if (role == "all") role.clear();
    std::string ckpt = need(c.paths.checkpoint, "--checkpoint");
    if (std::filesystem::is_directory(ckpt)) ckpt = (std::filesystem::path(ckpt) / "checkpoint.phyl").string();
    const std::string out = o.out.empty() ? need(c.paths.predictions, "--out") : o.out;
    cmd_predict(c, ckpt, need(c.paths.data, "--data"), role, out, ctx);
  } else if (eval->parsed()) {
    const RunConfig c = load(o, "evaluate");
    const EvaluationReport r =
        cmd_evaluate(c, need(c.paths.predictions, "--predictions"), need(c.paths.data, "--data"),
                     need(o.out, "--out"), ctx);
    if (!r.passed) return kExitThresholds;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const phylstm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kExitError;
}
