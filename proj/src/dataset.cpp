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

#include "refactor/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "refactor/hash.hpp"
#include "refactor/parallel.hpp"

namespace refactor {

using ojson = nlohmann::ordered_json;

void DatasetSpec::validate() const {
  if (train_cap < 1 || eval_cap < 1) throw std::invalid_argument("caps must be at least 1");
  double sum = train_fraction + valid_fraction + test_fraction;
  if (train_fraction < 0 || valid_fraction < 0 || test_fraction < 0 ||
      std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  }
}

std::string node_feature(const std::string& label, const std::string& prop) {
  return label + " " + prop;
}

GraphRecord make_record(const Database& db, const ExpansionRecord& e) {
  GraphRecord r;
  r.host = e.host;
  r.target_theorem = db[e.theorem].label;
  r.occurrence = e.occurrence;
  r.graph_id = r.host + "/" + r.target_theorem + "/" + std::to_string(r.occurrence);
  const ProofTree& g = e.graph;
  for (NodeId i = 0; i < g.size(); ++i) {
    r.labels.push_back(label_name(db, g, g.nodes[i].label));
    r.props.push_back(db.render(g.nodes[i].prop));
    r.target.push_back(e.target[i] ? 1 : 0);
    for (NodeId p : g.nodes[i].parents) r.edges.emplace_back(p, i);
  }
  return r;
}

std::string record_to_json(const GraphRecord& r) {
  ojson j;
  j["graph_id"] = r.graph_id;
  j["host"] = r.host;
  j["target_theorem"] = r.target_theorem;
  j["occurrence"] = r.occurrence;
  auto& nodes = j["nodes"] = ojson::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    nodes.push_back({{"id", i}, {"label", r.labels[i]}, {"prop", r.props[i]},
                     {"target", r.target[i]}});
  }
  auto& edges = j["edges"] = ojson::array();
  for (const auto& [p, c] : r.edges) edges.push_back({p, c});
  return j.dump();
}

GraphRecord record_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  GraphRecord r;
  r.graph_id = j.at("graph_id").get<std::string>();
  r.host = j.value("host", "");
  r.target_theorem = j.value("target_theorem", "");
  r.occurrence = j.value("occurrence", 0u);
  const auto& nodes = j.at("nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.at("id").get<std::size_t>() != i) {
      throw std::invalid_argument("record '" + r.graph_id + "' has unsorted node ids");
    }
    r.labels.push_back(n.at("label").get<std::string>());
    r.props.push_back(n.at("prop").get<std::string>());
    r.target.push_back(static_cast<std::uint8_t>(n.value("target", 0)));
  }
  for (const auto& e : j.at("edges")) {
    r.edges.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
  }
  return r;
}

ProofTree record_tree(const Database& db, const GraphRecord& r) {
  ProofTree t;
  t.theorem = r.host;
  t.nodes.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto l = db.find(r.labels[i]);
    if (!l) throw std::invalid_argument("unknown label '" + r.labels[i] + "' in " + r.graph_id);
    t.nodes[i].label = *l;
    t.nodes[i].prop = db.parse_expr(r.props[i]);
  }
  for (const auto& [p, c] : r.edges) {
    if (p >= c || c >= r.size()) {
      throw std::invalid_argument("malformed edge in " + r.graph_id);
    }
    t.nodes[c].parents.push_back(p);
  }
  return t;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split split_of(const DatasetSpec& spec, const std::string& target) {
  double u = unit_hash(spec.seed, target);
  if (u < spec.train_fraction) return Split::Train;
  if (u < spec.train_fraction + spec.valid_fraction) return Split::Valid;
  return Split::Test;
}

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k >= n) return idx;
  std::mt19937_64 rng(seed);
  // Unbiased bounded draw; std::uniform_int_distribution is not portable.
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

struct Candidate {
  Label host = 0;
  NodeId node = 0;
  std::size_t occurrence = 0;
  Label theorem = 0;
};

struct HostScan {
  std::vector<Candidate> candidates;
  std::map<std::string, std::size_t> discarded;
};

std::size_t max_feature_chars(const Database& db, const ProofTree& g) {
  std::size_t m = 0;
  for (const auto& n : g.nodes) {
    std::size_t len = label_name(db, g, n.label).size() + 1;
    for (std::size_t i = 0; i < n.prop.size(); ++i) {
      len += db.symbol(n.prop[i]).size() + (i ? 1 : 0);
    }
    m = std::max(m, len);
  }
  return m;
}

ojson histogram(const std::map<std::string, std::size_t>& per_target) {
  std::map<std::size_t, std::size_t> h;
  for (const auto& [t, n] : per_target) ++h[n];
  ojson j = ojson::object();
  for (const auto& [n, count] : h) j[std::to_string(n)] = count;
  return j;
}

std::size_t pre_total(const std::map<std::string, std::size_t>& per_target) {
  std::size_t n = 0;
  for (const auto& [t, c] : per_target) n += c;
  return n;
}

}  // namespace

Dataset build_dataset(const Database& db, const DatasetSpec& spec) {
  spec.validate();
  std::vector<Label> hosts;
  for (Label l : db.provables()) {
    if (!db[l].incomplete) hosts.push_back(l);
  }
  if (hosts.empty()) throw std::invalid_argument("database has no provable statements");

  TreeCache theorems(db, spec.host_limit);
  std::vector<HostScan> scans(hosts.size());
  // Pass 1: decide which expansions survive the filters without keeping
  // their trees.
  parallel_for(hosts.size(), spec.threads, [&](std::size_t i) {
    HostScan& s = scans[i];
    const Label h = hosts[i];
    if (expanded_size(db, db[h].proof) > spec.host_limit) {
      ++s.discarded["host_too_large"];
      return;
    }
    ProofTree host;
    try {
      host = build_tree(db, h, spec.host_limit);
    } catch (const TreeError&) {
      ++s.discarded["host_invalid"];
      return;
    }
    const auto sizes = subtree_sizes(host);
    const ProofContext ctx = statement_context(db, h);
    for (const auto& [node, occ] : expandable_nodes(db, host)) {
      const Label t = host.nodes[node].label;
      std::shared_ptr<const ProofTree> tt;
      try {
        tt = theorems.get(t);
      } catch (const TreeError&) {
        ++s.discarded["theorem_invalid"];
        continue;
      }
      auto n = expanded_node_count(host, sizes, node, *tt, hypothesis_uses(db, t, *tt));
      if (n > spec.max_nodes) {
        ++s.discarded["too_many_nodes"];
        continue;
      }
      ExpansionOutcome e = expand_once(db, host, node, ctx, theorems, occ);
      if (!e.record) {
        ++s.discarded["expansion_invalid"];
        continue;
      }
      if (max_feature_chars(db, e.record->graph) > spec.max_chars) {
        ++s.discarded["too_many_chars"];
        continue;
      }
      s.candidates.push_back({h, node, occ, t});
    }
  });

  std::map<std::string, std::size_t> discarded;
  std::map<std::string, std::vector<Candidate>> by_target;
  std::size_t pre_cap = 0;
  for (auto& s : scans) {
    for (const auto& [reason, n] : s.discarded) discarded[reason] += n;
    for (const auto& c : s.candidates) {
      by_target[db[c.theorem].label].push_back(c);
      ++pre_cap;
    }
  }

  // Split by target, cap occurrences per target.
  std::vector<Candidate> chosen[3];
  std::map<std::string, std::size_t> pre_hist[3], post_hist[3];
  for (auto& [target, cands] : by_target) {
    Split sp = split_of(spec, target);
    int k = static_cast<int>(sp);
    std::size_t cap = sp == Split::Train ? spec.train_cap : spec.eval_cap;
    pre_hist[k][target] = cands.size();
    auto keep = sample_indices(cands.size(), cap,
                               fnv1a64(target, fnv1a64(std::to_string(spec.seed))));
    post_hist[k][target] = keep.size();
    for (std::size_t i : keep) chosen[k].push_back(cands[i]);
  }

  // Pass 2: regenerate the kept records in host order.
  Dataset d;
  std::vector<GraphRecord>* out[3] = {&d.train, &d.valid, &d.test};
  for (int k = 0; k < 3; ++k) {
    auto& cs = chosen[k];
    std::sort(cs.begin(), cs.end(), [](const Candidate& a, const Candidate& b) {
      return a.host != b.host ? a.host < b.host : a.node < b.node;
    });
    out[k]->resize(cs.size());
    // Group by host so each host tree is built once.
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (i == 0 || cs[i].host != cs[i - 1].host) starts.push_back(i);
    }
    parallel_for(starts.size(), spec.threads, [&](std::size_t g) {
      std::size_t b = starts[g];
      std::size_t e = g + 1 < starts.size() ? starts[g + 1] : cs.size();
      const Label h = cs[b].host;
      ProofTree host = build_tree(db, h, spec.host_limit);
      const ProofContext ctx = statement_context(db, h);
      for (std::size_t i = b; i < e; ++i) {
        ExpansionOutcome r = expand_once(db, host, cs[i].node, ctx, theorems, cs[i].occurrence);
        (*out[k])[i] = make_record(db, *r.record);
      }
    });
  }

  ojson rep;
  rep["schema_version"] = kSchemaVersion;
  rep["spec"] = {{"max_nodes", spec.max_nodes},
                 {"max_chars", spec.max_chars},
                 {"train_cap", spec.train_cap},
                 {"eval_cap", spec.eval_cap},
                 {"split_fractions", {spec.train_fraction, spec.valid_fraction,
                                      spec.test_fraction}},
                 {"seed", spec.seed},
                 {"host_limit", spec.host_limit}};
  rep["hosts"] = hosts.size();
  rep["pre_cap"] = pre_cap;
  rep["post_cap"] = d.train.size() + d.valid.size() + d.test.size();
  ojson disc = ojson::object();
  std::size_t total_discarded = 0;
  for (const auto& [reason, n] : discarded) {
    disc[reason] = n;
    total_discarded += n;
  }
  rep["discarded"] = disc;
  rep["discarded_total"] = total_discarded;
  auto& splits = rep["splits"] = ojson::object();
  for (int k = 0; k < 3; ++k) {
    splits[to_string(static_cast<Split>(k))] = {
        {"targets", pre_hist[k].size()},
        {"pre_cap", pre_total(pre_hist[k])},
        {"post_cap", out[k]->size()},
        {"occurrence_histogram_pre_cap", histogram(pre_hist[k])},
        {"occurrence_histogram_post_cap", histogram(post_hist[k])}};
  }
  d.report = rep.dump(2);
  return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const char* name, const std::vector<GraphRecord>& rs) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    for (const auto& r : rs) os << record_to_json(r) << '\n';
  };
  write("train.jsonl", d.train);
  write("valid.jsonl", d.valid);
  write("test.jsonl", d.test);
  std::ofstream rep(dir / "report.json", std::ios::binary);
  rep << d.report << '\n';
}

std::vector<GraphRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<GraphRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(record_from_json(line));
  }
  return out;
}

std::vector<PredictionMask> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::vector<PredictionMask> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line);
    PredictionMask m;
    m.graph_id = j.at("graph_id").get<std::string>();
    m.probs = j.at("probs").get<std::vector<double>>();
    out.push_back(std::move(m));
  }
  return out;
}

double reference_loss(const std::vector<std::uint8_t>& target, const std::vector<double>& probs) {
  if (target.size() != probs.size()) {
    throw std::invalid_argument("probabilities and targets differ in length");
  }
  if (target.empty()) throw std::invalid_argument("empty graph");
  double sum = 0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    double p = std::clamp(probs[i], kLossEpsilon, 1.0 - kLossEpsilon);
    sum += target[i] ? std::log(p) : std::log1p(-p);
  }
  return -sum / static_cast<double>(target.size());
}

Scores score_predictions(const std::vector<GraphRecord>& records,
                         const std::unordered_map<std::string, PredictionMask>& masks) {
  Scores s;
  if (records.empty()) return s;
  std::size_t nodes = 0, correct = 0, proofs = 0;
  for (const auto& r : records) {
    auto it = masks.find(r.graph_id);
    if (it == masks.end()) throw std::invalid_argument("no prediction for " + r.graph_id);
    auto sel = threshold_mask(it->second, r.size());
    std::size_t ok = 0;
    for (std::size_t i = 0; i < r.size(); ++i) ok += sel[i] == (r.target[i] != 0);
    nodes += r.size();
    correct += ok;
    proofs += ok == r.size();
  }
  s.node_accuracy = nodes ? static_cast<double>(correct) / static_cast<double>(nodes) : 0.0;
  s.proof_accuracy = static_cast<double>(proofs) / static_cast<double>(records.size());
  return s;
}

}  // namespace refactor
