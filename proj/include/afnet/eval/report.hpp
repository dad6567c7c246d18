#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "afnet/eval/metrics.hpp"

namespace afnet::eval {

struct TileResult {
  std::string id;
  ConfusionMatrix cm;
};

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<int> mean_classes;
  std::vector<TileResult> tiles;
  ConfusionMatrix aggregate;  // elementwise sum over tiles
};

/// Aggregates per-tile matrices. All matrices must share the class count.
EvalReport make_report(std::vector<TileResult> tiles, std::vector<std::string> class_names,
                       std::vector<int> mean_classes = kTableClasses);

/// Aligned table of per-class F1, mean F1 and OA (percent, two decimals) for
/// each tile and the aggregate. Entries built from a 0/0 ratio carry `*`.
std::string format_text(const EvalReport& report);

/// `scope,class,precision,recall,f1,oa`, scope `tile:<id>` or `aggregate`.
/// One row per class (oa empty), then a `mean` row holding mean F1 and OA.
/// Values are fractions printed with round-trip precision.
std::string format_csv(const EvalReport& report);

struct CsvRow {
  std::string scope;
  std::string cls;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double oa = 0.0;
};

/// Inverse of format_csv; empty numeric fields read as 0.
std::vector<CsvRow> parse_csv(const std::string& text);

}  // namespace afnet::eval
