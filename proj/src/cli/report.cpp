// Copyright 2026 The RadioBench Authors
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

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "radiobench/shift_harness.hpp"

namespace radiobench::cli {
namespace {

struct Table {
  std::string name;
  std::string header;
  std::ostringstream body;
  std::size_t rows = 0;

  void add(const std::string& line) {
    body << line << '\n';
    ++rows;
  }
};

std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string join(std::initializer_list<std::string> parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ',';
    s += p;
  }
  return s;
}

void add_rows(const Json& rec, Table& zero_shot, Table& budgets, Table& wasserstein,
              Table& al) {
  const std::string hash = rec.at("config_hash").get<std::string>();
  const std::string kind = rec.value("kind", std::string());
  const Json& r = rec.at("result");
  if (kind == "zero_shot") {
    zero_shot.add(join({hash, cell(r.at("variant")), cell(r.value("train", Json())),
                        cell(r.value("test", Json())), cell(r.value("calibrated", Json())),
                        cell(r.value("n_scored", Json())), cell(r.at("raw_median_m")),
                        cell(r.value("calibrated_median_m", Json()))}));
  } else if (kind == "finetune") {
    for (const auto& p : r.at("curve")) {
      budgets.add(join({hash, cell(r.at("variant")), cell(r.value("train_dataset", Json())),
                        cell(r.value("dataset", Json())), cell(p.at("budget")),
                        cell(p.at("median_m"))}));
    }
  } else if (kind == "wasserstein") {
    const auto& names = r.at("datasets");
    const auto& mats = r.at("per_locator");
    for (std::size_t l = 0; l < mats.size(); ++l) {
      for (std::size_t i = 0; i < mats[l].size(); ++i) {
        for (std::size_t j = 0; j < mats[l][i].size(); ++j) {
          wasserstein.add(join({hash, cell(r.value("variant", Json())), std::to_string(l),
                                cell(names.at(i)), cell(names.at(j)), cell(mats[l][i][j])}));
        }
      }
    }
  } else if (kind == "active_learning") {
    for (const auto& c : r.at("curves")) {
      for (const auto& round : c.at("rounds")) {
        al.add(join({hash, cell(r.at("variant")), cell(c.at("criterion")),
                     cell(round.at("n_labels")), cell(round.at("val_loss")),
                     cell(round.at("val_median_m"))}));
      }
    }
  }
}

}  // namespace

int cmd_report(const ReportArgs& a, const GlobalOptions& g, std::ostream& out,
               std::ostream& err) {
  const fs::path root = a.run_dir.empty() ? output_root(g) : fs::path(a.run_dir);
  std::vector<std::string> warnings;
  const auto records = read_ledger((root / "ledger.jsonl").string(), &warnings);

  Table runs{"runs", "config_hash,command,kind,seed,run_dir", {}, 0};
  Table zero_shot{"zero_shot",
                  "config_hash,variant,train_dataset,test_dataset,calibrated,n_scored,"
                  "raw_median_m,calibrated_median_m",
                  {},
                  0};
  Table budgets{"budget_curves", "config_hash,variant,train_dataset,dataset,budget,median_m",
                {}, 0};
  Table wasserstein{"wasserstein", "config_hash,variant,locator,row,col,distance", {}, 0};
  Table al{"al_curves", "config_hash,variant,criterion,n_labels,val_loss,val_median_m", {}, 0};

  // Reruns of one config share a hash and produce identical results, so the
  // first record of each hash stands for all of them.
  std::set<std::string> seen;
  std::size_t duplicates = 0;
  for (const auto& rec : records) {
    const Json& j = rec.record;
    try {
      const std::string hash = j.at("config_hash").get<std::string>();
      if (!seen.insert(hash).second) {
        ++duplicates;
        continue;
      }
      runs.add(join({hash, cell(j.value("command", Json())), cell(j.value("kind", Json())),
                     cell(j.value("seed", Json())), cell(j.value("run_dir", Json()))}));
      add_rows(j, zero_shot, budgets, wasserstein, al);
    } catch (const Json::exception& e) {
      warnings.push_back("line " + std::to_string(rec.line) +
                         ": record is missing fields (" + e.what() + ")");
    }
  }
  for (const auto& w : warnings) err << Json{{"warning", w}}.dump() << "\n";

  const fs::path dir = root / "report";
  fs::create_directories(dir);
  Json tables = Json::object();
  for (Table* t : {&runs, &zero_shot, &budgets, &wasserstein, &al}) {
    write_text(dir / (t->name + ".csv"), t->header + "\n" + t->body.str());
    tables[t->name] = {{"path", (dir / (t->name + ".csv")).string()}, {"rows", t->rows}};
  }
  out << Json{{"ledger_records", records.size()},
              {"runs", runs.rows},
              {"duplicates", duplicates},
              {"warnings", warnings.size()},
              {"tables", tables}}
             .dump(2)
      << "\n";
  return 0;
}

}  // namespace radiobench::cli
