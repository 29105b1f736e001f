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

// Writes a synthetic corpus grown from a base database.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "refactor/database.hpp"
#include "refactor/synth.hpp"
#include "refactor/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Grow a Metamath database with generated theorems"};
  std::string base, out;
  refactor::SynthOptions o;
  app.add_option("--base", base, "Base database")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--output", out, "Output database")->required();
  app.add_option("--theorems", o.theorems, "Number of theorems to add");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--max-fact-nodes", o.max_fact_nodes, "Largest proof tree of a derived fact");
  app.add_option("--max-theorem-nodes", o.max_theorem_nodes, "Largest proof tree of a new theorem");
  app.add_option("--prefix", o.prefix, "Label prefix of new theorems");
  CLI11_PARSE(app, argc, argv);
  try {
    std::string text = refactor::synthesize(refactor::read_file(base), o);
    auto db = refactor::parse_database(text);
    auto failures = refactor::verify_database(db);
    if (!failures.empty()) {
      std::cerr << "generated database fails to verify at " << failures.front().label << "\n";
      return 1;
    }
    std::ofstream os(out, std::ios::binary);
    os << text;
    if (!os) {
      std::cerr << "cannot write " << out << "\n";
      return 1;
    }
    std::cout << db.provables().size() << " provable statements written to " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
