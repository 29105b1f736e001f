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

#include "refactor/writer.hpp"

#include <numeric>
#include <string>

namespace refactor {

namespace {

void write_symbols(const Database& db, std::ostream& os, const char* keyword,
                   const std::vector<SymbolId>& symbols) {
  os << keyword;
  for (SymbolId s : symbols) os << ' ' << db.symbol(s);
  os << " $.\n";
}

// Wraps long proofs at roughly 79 columns.
void write_proof(std::ostream& os, const std::string& indent,
                 const std::vector<std::string>& tokens) {
  std::size_t col = 80;
  for (const auto& t : tokens) {
    if (col + 1 + t.size() > 79) {
      os << '\n' << indent << "  ";
      col = indent.size() + 2;
    } else {
      os << ' ';
      ++col;
    }
    os << t;
    col += t.size();
  }
  os << " $.\n";
}

}  // namespace

void write_database(const Database& db, std::ostream& os, const WriteOptions& options) {
  std::vector<std::size_t> order = options.unit_order;
  if (order.empty()) {
    order.resize(db.layout().size());
    std::iota(order.begin(), order.end(), 0);
  }
  for (std::size_t u : order) {
    std::size_t depth = 0;
    for (const LayoutItem& item : db.layout().at(u)) {
      if (item.kind == LayoutItem::Kind::CloseScope && depth > 0) --depth;
      std::string indent(2 * depth, ' ');
      os << indent;
      switch (item.kind) {
        case LayoutItem::Kind::OpenScope:
          os << "${\n";
          ++depth;
          break;
        case LayoutItem::Kind::CloseScope:
          os << "$}\n";
          break;
        case LayoutItem::Kind::Constants:
          write_symbols(db, os, "$c", item.symbols);
          break;
        case LayoutItem::Kind::Variables:
          write_symbols(db, os, "$v", item.symbols);
          break;
        case LayoutItem::Kind::Disjoint:
          write_symbols(db, os, "$d", item.symbols);
          break;
        case LayoutItem::Kind::Statement: {
          const Statement& s = db[item.statement];
          static const char* kKeyword[] = {"$f", "$e", "$a", "$p"};
          os << s.label << ' ' << kKeyword[static_cast<int>(s.kind)] << ' ' << db.render(s.expr);
          if (s.kind != StatementKind::Provable) {
            os << " $.\n";
            break;
          }
          os << " $=";
          auto it = options.proofs.find(item.statement);
          std::vector<std::string> tokens;
          if (it != options.proofs.end()) {
            for (Label l : it->second) tokens.push_back(db[l].label);
          } else {
            std::size_t pos = 0;
            const std::string& raw = s.raw_proof;
            while (pos < raw.size()) {
              std::size_t end = raw.find(' ', pos);
              if (end == std::string::npos) end = raw.size();
              tokens.push_back(raw.substr(pos, end - pos));
              pos = end + 1;
            }
          }
          write_proof(os, indent, tokens);
          break;
        }
      }
    }
  }
}

}  // namespace refactor
