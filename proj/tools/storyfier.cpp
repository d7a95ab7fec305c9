// Copyright 2026 The Storyfier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// storyfier: corpus statistics, training-data export, story evaluation,
// study simulation and the HTTP service.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "storyfier/cli.hpp"
#include "storyfier/error.hpp"
#include "storyfier/service.hpp"

namespace sc = storyfier::cli;

int main(int argc, char** argv) {
  CLI::App app{"Storyfier vocabulary-learning toolkit"};
  app.require_subcommand(1);

  std::string format = "json";
  auto add_format = [&format](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));
  };

  // stats
  std::string corpus_path, vocab_path;
  auto* stats = app.add_subcommand("stats", "Print corpus statistics");
  stats->add_option("--corpus", corpus_path, "Story CSV (storyid,storytitle,sentence1..5)")->required();
  stats->add_option("--vocab", vocab_path, "Vocabulary NDJSON")->required();
  add_format(stats);

  // export
  sc::ExportOptions ex;
  std::string task = "generate";
  auto* exp = app.add_subcommand("export", "Write fine-tuning examples as NDJSON");
  exp->add_option("--corpus", ex.corpus_path, "Story CSV")->required();
  exp->add_option("--vocab", ex.vocab_path, "Vocabulary NDJSON")->required();
  exp->add_option("--task", task, "generate or infill")->check(CLI::IsMember({"generate", "infill"}));
  exp->add_option("--seed", ex.seed, "Random seed for infill spans");
  exp->add_option("--per-sentence", ex.per_sentence, "Infill examples per sentence")->check(CLI::PositiveNumber);
  exp->add_option("--out", ex.out_path, "Output file")->required();

  // eval
  sc::EvalOptions ev;
  std::string eval_format = "table";
  auto* eval = app.add_subcommand("eval", "Compare two story sets");
  eval->add_option("--a", ev.stories_a, "First story CSV")->required();
  eval->add_option("--b", ev.stories_b, "Second story CSV")->required();
  eval->add_option("--name-a", ev.name_a, "Label of the first set");
  eval->add_option("--name-b", ev.name_b, "Label of the second set");
  eval->add_option("--embeddings", ev.embeddings_path, "Embedding file (default: hashing embedder)");
  eval->add_option("--grammar-url", ev.grammar_url, "LanguageTool base URL (default: no-error checker)");
  eval->add_option("--ratings", ev.ratings_path, "Human ratings CSV");
  eval->add_option("--format", eval_format, "Output format")->check(CLI::IsMember({"json", "table"}));

  // simulate
  std::size_t participants = 4;
  std::uint64_t sim_seed = 0;
  std::string sim_vocab, sim_out;
  auto* sim = app.add_subcommand("simulate", "Simulate the counterbalanced study");
  sim->add_option("--vocab", sim_vocab, "Vocabulary NDJSON")->required();
  sim->add_option("--participants,-n", participants, "Number of synthetic learners");
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--out", sim_out, "Output CSV (default: stdout)");

  // serve
  storyfier::service::ServiceConfig cfg;
  std::string config_file, listen;
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  srv->add_option("--config", config_file, "JSON config file");
  srv->add_option("--listen", listen, "host:port");
  srv->add_option("--vocab", cfg.vocab_path, "Vocabulary NDJSON");
  srv->add_option("--generation-url", cfg.generation_url, "Generation backend base URL");
  srv->add_option("--grammar-url", cfg.grammar_url, "LanguageTool base URL");
  srv->add_option("--embeddings", cfg.embeddings_path, "Embedding file");
  srv->add_option("--data-dir", cfg.data_dir, "Event log and snapshot directory");
  srv->add_flag("--template", cfg.use_template, "Use the offline template backend");
  srv->add_option("--snapshot-every", cfg.snapshot_every, "Events between snapshots (0 disables)");
  srv->add_option("--seed", cfg.seed, "Base seed for sessions created without one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? sc::kExitOk : sc::kExitUsage;
  }

  if (*stats) {
    return sc::guarded(std::cerr, [&] {
      sc::cmd_corpus_stats(corpus_path, vocab_path, sc::format_from_string(format), std::cout);
    });
  }
  if (*exp) {
    return sc::guarded(std::cerr, [&] {
      ex.task = task == "infill" ? storyfier::corpus::Task::infill : storyfier::corpus::Task::generate;
      const auto n = sc::cmd_export_training(ex, std::cerr);
      std::cerr << "wrote " << n << " examples to " << ex.out_path << '\n';
    });
  }
  if (*eval) {
    return sc::guarded(std::cerr, [&] {
      ev.format = sc::format_from_string(eval_format);
      sc::cmd_eval(ev, std::cout);
    });
  }
  if (*sim) {
    return sc::guarded(std::cerr, [&] {
      if (sim_out.empty()) {
        sc::cmd_simulate_study(sim_vocab, participants, sim_seed, std::cout);
        return;
      }
      std::ofstream out(sim_out, std::ios::binary | std::ios::trunc);
      if (!out) throw storyfier::IoError("cannot write '" + sim_out + "'");
      sc::cmd_simulate_study(sim_vocab, participants, sim_seed, out);
    });
  }
  // serve: defaults < config file < environment < flags.
  return sc::guarded(std::cerr, [&] {
    storyfier::service::ServiceConfig merged;
    if (!config_file.empty()) merged = storyfier::service::load_config_file(config_file, merged);
    merged = storyfier::service::config_from_env(merged);
    const storyfier::service::ServiceConfig defaults;
    if (!listen.empty()) merged = storyfier::service::config_from_json({{"listen", listen}}, merged);
    if (!cfg.vocab_path.empty()) merged.vocab_path = cfg.vocab_path;
    if (!cfg.generation_url.empty()) merged.generation_url = cfg.generation_url;
    if (!cfg.grammar_url.empty()) merged.grammar_url = cfg.grammar_url;
    if (!cfg.embeddings_path.empty()) merged.embeddings_path = cfg.embeddings_path;
    if (cfg.data_dir != defaults.data_dir) merged.data_dir = cfg.data_dir;
    if (cfg.use_template) merged.use_template = true;
    if (srv->count("--snapshot-every")) merged.snapshot_every = cfg.snapshot_every;
    if (srv->count("--seed")) merged.seed = cfg.seed;
    std::cerr << "storyfier serving on " << merged.host << ":" << merged.port << '\n';
    storyfier::service::serve(merged);
  });
}
