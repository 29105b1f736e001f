/* Copyright 2026 The refactor-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "refactor/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "refactor/baseline.hpp"
#include "refactor/database.hpp"
#include "refactor/dataset.hpp"
#include "refactor/expansion.hpp"
#include "refactor/extraction.hpp"
#include "refactor/parallel.hpp"
#include "refactor/refactor.hpp"
#include "refactor/verify.hpp"
#include "refactor/writer.hpp"

namespace refactor {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Domain failure with a message for standard error.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LogLevel { Quiet, Info, Debug };

struct Common {
  unsigned threads = default_threads();
  LogLevel log = LogLevel::Info;
  std::ostream* err = nullptr;

  void info(const std::string& msg) const {
    if (log != LogLevel::Quiet) *err << msg << "\n";
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw DomainError("cannot write '" + path.string() + "'");
}

bool same_file(const fs::path& a, const fs::path& b) {
  std::error_code ec;
  return fs::exists(b, ec) && fs::equivalent(a, b, ec);
}

// Outputs must never overwrite inputs.
void check_outputs(const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) {
    if (o.empty()) continue;
    for (const auto& i : inputs) {
      if (!i.empty() && same_file(i, o)) {
        throw CLI::ValidationError("output '" + o + "' would overwrite input '" + i + "'");
      }
    }
  }
}

Database load(const std::string& path, const Common& c) {
  Database db = load_database(path);
  c.info("loaded " + path + ": " + std::to_string(db.size()) + " statements");
  return db;
}

std::map<std::string, std::string> read_origins(const std::vector<std::string>& paths) {
  std::map<std::string, std::string> out;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) throw DomainError("cannot open '" + p + "'");
    auto j = nlohmann::json::parse(in);
    const auto& m = j.contains("origins") ? j["origins"] : j;
    for (const auto& [name, origin] : m.items()) out[name] = origin.get<std::string>();
  }
  return out;
}

ojson origins_json(const std::vector<ExtractedTheorem>& theorems) {
  ojson o = ojson::object();
  for (const auto& t : theorems) o[t.name] = t.origin;
  return o;
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
  std::string db;
  std::vector<std::string> labels;
};

int cmd_verify(const VerifyArgs& a, const Common& c, std::ostream& out) {
  Database db = load(a.db, c);
  std::vector<Label> only;
  for (const auto& name : a.labels) {
    auto l = db.find(name);
    if (!l || db[*l].kind != StatementKind::Provable) {
      throw DomainError("'" + name + "' is not a provable statement");
    }
    only.push_back(*l);
  }
  auto failures = verify_database(db, only, c.threads);
  for (const auto& f : failures) {
    *c.err << db[f.label].label << ": " << to_string(f.result.error) << ": "
           << f.result.message << "\n";
  }
  std::size_t checked = only.empty() ? db.provables().size() : only.size();
  out << checked - failures.size() << " of " << checked << " proofs verified\n";
  return failures.empty() ? kExitOk : kExitDomainError;
}

// dataset --------------------------------------------------------------------

struct DatasetArgs {
  std::string db;
  std::string out;
  DatasetSpec spec;
};

int cmd_dataset(DatasetArgs a, const Common& c, std::ostream& out) {
  Database db = load(a.db, c);
  a.spec.threads = c.threads;
  Dataset d = build_dataset(db, a.spec);
  write_dataset(d, a.out);
  out << "train " << d.train.size() << ", valid " << d.valid.size() << ", test "
      << d.test.size() << " records written to " << a.out << "\n";
  return kExitOk;
}

// extract --------------------------------------------------------------------

struct ExtractArgs {
  std::string db;
  std::vector<std::string> datasets;
  std::string preds;
  double threshold = 0.5;
  std::size_t max_nodes = 5000;
  std::string out;
  std::string report;
};

int cmd_extract(const ExtractArgs& a, const Common& c, std::ostream& out) {
  Database db = load(a.db, c);
  std::unordered_map<std::string, GraphRecord> records;
  for (const auto& path : a.datasets) {
    for (auto& r : read_records(path)) records.emplace(r.graph_id, std::move(r));
  }
  auto preds = read_predictions(a.preds);

  struct Item {
    ExtractionVerdict verdict;
    bool skipped = false;
    bool scored = false;
    std::size_t correct_nodes = 0;
    std::size_t nodes = 0;
  };
  std::vector<Item> items(preds.size());
  for (auto& p : preds) p.threshold = a.threshold;
  parallel_for(preds.size(), c.threads, [&](std::size_t i) {
    const PredictionMask& m = preds[i];
    Item& it = items[i];
    ProofTree tree;
    ExtractionOptions opt;
    auto r = records.find(m.graph_id);
    if (r != records.end()) {
      tree = record_tree(db, r->second);
    } else {
      auto l = db.find(m.graph_id);
      if (!l || db[*l].kind != StatementKind::Provable) {
        throw DomainError("prediction '" + m.graph_id + "' names no record or theorem");
      }
      if (expanded_size(db, db[*l].proof) > a.max_nodes) {
        it.skipped = true;
        return;
      }
      tree = build_tree(db, *l, a.max_nodes);
      opt.reject_whole_tree = true;
    }
    if (tree.size() > a.max_nodes) {
      it.skipped = true;
      return;
    }
    it.verdict = verify_extraction(db, tree, m, opt);
    if (r != records.end()) {
      auto sel = threshold_mask(m, tree.size());
      it.scored = true;
      it.nodes = tree.size();
      for (std::size_t k = 0; k < tree.size(); ++k) {
        it.correct_nodes += sel[k] == (r->second.target[k] != 0);
      }
    }
    if (it.verdict.theorem) {
      it.verdict.theorem->origin = r != records.end() ? "expanded" : "original";
    }
  });

  std::map<std::string, std::size_t> counts{
      {"not_tree_invalid", 0}, {"tree_invalid", 0}, {"tree_valid", 0}};
  std::map<std::string, std::size_t> reasons;
  std::vector<ExtractedTheorem> valid;
  std::size_t skipped = 0, scored = 0, nodes = 0, correct = 0, exact = 0;
  for (auto& it : items) {
    if (it.skipped) {
      ++skipped;
      continue;
    }
    ++counts[to_string(it.verdict.category)];
    if (!it.verdict.reason.empty()) ++reasons[it.verdict.reason];
    if (it.verdict.theorem) valid.push_back(std::move(*it.verdict.theorem));
    if (it.scored) {
      ++scored;
      nodes += it.nodes;
      correct += it.correct_nodes;
      exact += it.correct_nodes == it.nodes;
    }
  }
  const std::size_t total_valid = valid.size();
  valid = dedup(std::move(valid));
  assign_names(db, valid);

  if (!a.out.empty()) {
    std::ostringstream frag;
    write_fragment(db, valid, frag);
    write_text(a.out, frag.str());
  }
  ojson rep;
  rep["schema_version"] = kSchemaVersion;
  rep["predictions"] = preds.size();
  rep["skipped"] = skipped;
  rep["threshold"] = a.threshold;
  rep["categories"] = counts;
  const std::size_t judged = preds.size() - skipped;
  ojson frac = ojson::object();
  for (const auto& [k, v] : counts) {
    frac[k] = judged ? static_cast<double>(v) / static_cast<double>(judged) : 0.0;
  }
  rep["fractions"] = frac;
  rep["invalid_reasons"] = reasons;
  rep["valid_total"] = total_valid;
  rep["valid_unique"] = valid.size();
  if (scored) {
    rep["node_accuracy"] = static_cast<double>(correct) / static_cast<double>(nodes);
    rep["proof_accuracy"] = static_cast<double>(exact) / static_cast<double>(scored);
  }
  rep["origins"] = origins_json(valid);
  if (!a.report.empty()) write_text(a.report, rep.dump(2) + "\n");
  out << counts["tree_valid"] << " tree_valid, " << counts["tree_invalid"] << " tree_invalid, "
      << counts["not_tree_invalid"] << " not_tree_invalid; " << valid.size()
      << " unique theorems\n";
  return kExitOk;
}

// baseline -------------------------------------------------------------------

struct BaselineArgs {
  std::string db;
  std::size_t top_n = 1923;
  bool expanded = false;
  std::size_t max_nodes = 5000;
  std::string out;
  std::string report;
};

int cmd_baseline(const BaselineArgs& a, const Common& c, std::ostream& out) {
  Database db = load(a.db, c);
  std::vector<Label> hosts;
  for (Label l : db.provables()) {
    if (!db[l].incomplete) hosts.push_back(l);
  }
  TreeCache trees(db, a.max_nodes);
  std::vector<FrequencyTable> partial(hosts.size());
  std::vector<std::size_t> mined(hosts.size(), 0);
  parallel_for(hosts.size(), c.threads, [&](std::size_t i) {
    if (expanded_size(db, db[hosts[i]].proof) > a.max_nodes) return;
    std::shared_ptr<const ProofTree> host;
    try {
      host = trees.get(hosts[i]);
    } catch (const TreeError&) {
      return;
    }
    if (!a.expanded) {
      partial[i] = mine_node_closures(db, {host.get()});
      mined[i] = 1;
      return;
    }
    const auto sizes = subtree_sizes(*host);
    const ProofContext ctx = statement_context(db, hosts[i]);
    for (const auto& [node, occ] : expandable_nodes(db, *host)) {
      const Label t = host->nodes[node].label;
      std::shared_ptr<const ProofTree> tt;
      try {
        tt = trees.get(t);
      } catch (const TreeError&) {
        continue;
      }
      if (expanded_node_count(*host, sizes, node, *tt, hypothesis_uses(db, t, *tt)) >
          a.max_nodes) {
        continue;
      }
      ExpansionOutcome e = expand_once(db, *host, node, ctx, trees, occ);
      if (!e.record) continue;
      merge_tables(partial[i], mine_node_closures(db, {&e.record->graph}));
      ++mined[i];
    }
  });
  FrequencyTable table;
  std::size_t proofs = 0;
  for (std::size_t i = 0; i < hosts.size(); ++i) {
    merge_tables(table, std::move(partial[i]));
    proofs += mined[i];
  }
  std::vector<ExtractedTheorem> top = top_n(table, a.top_n);
  for (auto& t : top) t.origin = "baseline";
  const double rate = match_rate_vs_library(db, top);
  std::vector<std::size_t> counts;
  for (const auto& t : top) counts.push_back(table.at(t.dedup_key).count);
  assign_names(db, top);

  if (!a.out.empty()) {
    std::ostringstream frag;
    write_fragment(db, top, frag);
    write_text(a.out, frag.str());
  }
  ojson rep;
  rep["schema_version"] = kSchemaVersion;
  rep["source"] = a.expanded ? "expanded" : "raw";
  rep["proofs_mined"] = proofs;
  rep["distinct_theorems"] = table.size();
  rep["top_n"] = a.top_n;
  rep["written"] = top.size();
  rep["match_rate"] = rate;
  auto& entries = rep["theorems"] = ojson::array();
  for (std::size_t i = 0; i < top.size(); ++i) {
    entries.push_back({{"name", top[i].name}, {"count", counts[i]}, {"key", top[i].dedup_key}});
  }
  rep["origins"] = origins_json(top);
  if (!a.report.empty()) write_text(a.report, rep.dump(2) + "\n");
  out << top.size() << " of " << table.size() << " mined theorems written; match rate " << rate
      << "\n";
  return kExitOk;
}

// refactor -------------------------------------------------------------------

struct RefactorArgs {
  std::string db;
  std::string new_theorems;
  std::string out;
  std::string stats;
  std::vector<std::string> origins;
  std::size_t max_nodes = kDefaultTreeLimit;
};

int cmd_refactor(const RefactorArgs& a, const Common& c, std::ostream& out) {
  auto [db, added] = load_with_fragment(a.db, a.new_theorems);
  c.info("refactoring with " + std::to_string(added.size()) + " new theorems");
  RefactorOptions opt;
  opt.threads = c.threads;
  opt.max_tree_nodes = a.max_nodes;
  opt.origins = read_origins(a.origins);
  RefactorResult r = refactor_database(db, added, opt);
  std::ostringstream text;
  write_database(db, text, r.output);
  write_text(a.out, text.str());
  if (!a.stats.empty()) write_text(a.stats, stats_to_json(r.stats) + "\n");
  const auto& total = r.stats.by_origin.at("total");
  out << r.stats.refactored_proof_count << " proofs refactored, " << total.theorems_used
      << " theorems used, " << total.total_nodes_saved << " nodes saved\n";
  return kExitOk;
}

// stats ----------------------------------------------------------------------

struct StatsArgs {
  std::string db;
  std::string labels_from;
  std::string out;
};

int cmd_stats(const StatsArgs& a, const Common& c, std::ostream& out) {
  Database db = load(a.db, c);
  std::size_t axioms = 0, provables = 0, floating = 0, essential = 0;
  for (const auto& s : db.statements()) {
    switch (s.kind) {
      case StatementKind::Axiom: ++axioms; break;
      case StatementKind::Provable: ++provables; break;
      case StatementKind::Floating: ++floating; break;
      case StatementKind::Essential: ++essential; break;
    }
  }
  std::vector<std::string> watch;
  if (!a.labels_from.empty()) {
    // The fragment need not parse on its own; its $p labels are enough.
    std::istringstream in(read_file(a.labels_from));
    std::string prev, tok;
    bool comment = false;
    while (in >> tok) {
      if (tok == "$(") comment = true;
      if (!comment && tok == "$p") watch.push_back(prev);
      if (tok == "$)") comment = false;
      prev = tok;
    }
  }
  std::vector<Label> ps = db.provables();
  std::vector<std::uint64_t> sizes(ps.size());
  std::vector<std::map<std::string, std::size_t>> uses(ps.size());
  std::unordered_map<Label, std::string> watched;
  for (const auto& w : watch) {
    if (auto l = db.find(w)) watched.emplace(*l, w);
  }
  parallel_for(ps.size(), c.threads, [&](std::size_t i) {
    sizes[i] = expanded_size(db, db[ps[i]].proof);
    if (watched.empty()) return;
    for (const auto& step : db[ps[i]].proof) {
      if (step.backref) continue;
      if (auto it = watched.find(step.value); it != watched.end()) ++uses[i][it->second];
    }
  });
  std::uint64_t total = 0, largest = 0;
  for (auto s : sizes) {
    total += s;
    largest = std::max(largest, s);
  }
  ojson rep;
  rep["schema_version"] = kSchemaVersion;
  rep["statements"] = db.size();
  rep["axioms"] = axioms;
  rep["provables"] = provables;
  rep["floating_hypotheses"] = floating;
  rep["essential_hypotheses"] = essential;
  rep["proof_nodes"] = total;
  rep["max_proof_nodes"] = largest;
  if (!watch.empty()) {
    ojson u = ojson::object();
    for (const auto& w : watch) u[w] = 0;
    for (const auto& m : uses) {
      for (const auto& [w, n] : m) u[w] = u[w].get<std::size_t>() + n;
    }
    rep["label_uses"] = u;
  }
  const std::string text = rep.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metamath theorem extraction and proof refactoring toolkit", "refactor-kit"};
  app.require_subcommand(1);
  Common common;
  common.err = &err;
  std::string log_level = "info";
  app.add_option("--threads", common.threads, "Worker threads (default: all cores)")
      ->envname("REFACTOR_THREADS")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-level", log_level, "quiet, info or debug")
      ->envname("REFACTOR_LOG_LEVEL")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Verify every proof of a database");
  verify->add_option("db", va.db, "Database")->required()->check(CLI::ExistingFile);
  verify->add_option("--labels", va.labels, "Only these statements")->delimiter(',');

  DatasetArgs da;
  auto* dataset = app.add_subcommand("dataset", "Build the theorem extraction dataset");
  dataset->add_option("db", da.db, "Database")->required()->check(CLI::ExistingFile);
  dataset->add_option("-o,--output", da.out, "Output directory")->required();
  dataset->add_option("--max-nodes", da.spec.max_nodes, "Largest expanded tree")
      ->envname("REFACTOR_MAX_NODES");
  dataset->add_option("--max-chars", da.spec.max_chars, "Longest node feature text")
      ->envname("REFACTOR_MAX_CHARS");
  dataset->add_option("--train-cap", da.spec.train_cap, "Records per target in train")
      ->envname("REFACTOR_TRAIN_CAP");
  dataset->add_option("--eval-cap", da.spec.eval_cap, "Records per target in valid and test")
      ->envname("REFACTOR_EVAL_CAP");
  dataset->add_option("--train-fraction", da.spec.train_fraction);
  dataset->add_option("--valid-fraction", da.spec.valid_fraction);
  dataset->add_option("--test-fraction", da.spec.test_fraction);
  dataset->add_option("--seed", da.spec.seed, "Split and sampling seed")
      ->envname("REFACTOR_SEED");
  dataset->add_option("--host-limit", da.spec.host_limit, "Skip larger host proofs")
      ->envname("REFACTOR_HOST_LIMIT");

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract", "Check predicted node sets");
  extract->add_option("--db", ea.db, "Database")->required()->check(CLI::ExistingFile);
  extract->add_option("--dataset", ea.datasets, "Dataset records the predictions refer to")
      ->check(CLI::ExistingFile);
  extract->add_option("--preds", ea.preds, "Predictions, one JSON object per line")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("--threshold", ea.threshold, "Select nodes above this probability")
      ->envname("REFACTOR_THRESHOLD");
  extract->add_option("--max-nodes", ea.max_nodes, "Skip larger trees")
      ->envname("REFACTOR_MAX_NODES");
  extract->add_option("-o,--output", ea.out, "Fragment with the valid theorems");
  extract->add_option("--report", ea.report, "JSON report");

  BaselineArgs ba;
  auto* baseline = app.add_subcommand("baseline", "Frequency-mined theorems");
  baseline->add_option("db", ba.db, "Database")->required()->check(CLI::ExistingFile);
  baseline->add_option("--top-n", ba.top_n, "Theorems to keep")->envname("REFACTOR_TOP_N");
  baseline->add_flag("--expanded", ba.expanded, "Mine expanded proofs instead of raw ones");
  baseline->add_option("--max-nodes", ba.max_nodes, "Skip larger trees")
      ->envname("REFACTOR_MAX_NODES");
  baseline->add_option("-o,--output", ba.out, "Fragment with the mined theorems");
  baseline->add_option("--report", ba.report, "JSON report");

  RefactorArgs ra;
  auto* refactor = app.add_subcommand("refactor", "Rewrite proofs to use new theorems");
  refactor->add_option("db", ra.db, "Database")->required()->check(CLI::ExistingFile);
  refactor->add_option("--new-theorems", ra.new_theorems, "Fragment of new theorems")
      ->required()
      ->check(CLI::ExistingFile);
  refactor->add_option("-o,--output", ra.out, "Refactored database")->required();
  refactor->add_option("--stats", ra.stats, "JSON usage statistics");
  refactor->add_option("--origins", ra.origins, "JSON map from theorem name to origin")
      ->check(CLI::ExistingFile);
  refactor->add_option("--max-nodes", ra.max_nodes, "Leave larger proofs untouched")
      ->envname("REFACTOR_MAX_NODES");

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Database statistics");
  stats->add_option("db", sa.db, "Database")->required()->check(CLI::ExistingFile);
  stats->add_option("--labels-from", sa.labels_from, "Count uses of the theorems of this file")
      ->check(CLI::ExistingFile);
  stats->add_option("-o,--output", sa.out, "JSON report (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    check_outputs({va.db}, {});
    check_outputs({da.db}, {da.out});
    check_outputs({ea.db, ea.preds, ea.report}, {ea.out});
    check_outputs({ea.db, ea.preds}, {ea.report});
    for (const auto& d : ea.datasets) check_outputs({d}, {ea.out, ea.report});
    check_outputs({ba.db}, {ba.out, ba.report});
    check_outputs({ra.db, ra.new_theorems}, {ra.out, ra.stats});
    check_outputs({sa.db, sa.labels_from}, {sa.out});
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsageError;
  }
  common.log = log_level == "quiet" ? LogLevel::Quiet
             : log_level == "debug" ? LogLevel::Debug
                                    : LogLevel::Info;

  try {
    if (*verify) return cmd_verify(va, common, out);
    if (*dataset) {
      da.spec.validate();
      return cmd_dataset(da, common, out);
    }
    if (*extract) return cmd_extract(ea, common, out);
    if (*baseline) return cmd_baseline(ba, common, out);
    if (*refactor) return cmd_refactor(ra, common, out);
    if (*stats) return cmd_stats(sa, common, out);
  } catch (const ParseError& e) {
    err << "error: parse: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageError;
}

}  // namespace refactor
