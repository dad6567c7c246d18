#include "afnet/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "afnet/core/errors.hpp"

namespace afnet::eval {

EvalReport make_report(std::vector<TileResult> tiles, std::vector<std::string> class_names,
                       std::vector<int> mean_classes) {
  if (class_names.empty()) throw ContractError("report needs class names");
  const int k = static_cast<int>(class_names.size());
  for (int c : mean_classes)
    if (c < 0 || c >= k) throw ContractError("mean F1 class " + std::to_string(c) + " outside the class list");
  if (mean_classes.empty()) throw ContractError("mean F1 over an empty class set");
  EvalReport r;
  r.aggregate = ConfusionMatrix(k);
  for (const auto& t : tiles) {
    if (t.cm.classes() != k) {
      throw DimensionError("tile " + t.id + " has " + std::to_string(t.cm.classes()) + " classes, report has " +
                           std::to_string(k));
    }
    r.aggregate += t.cm;
  }
  r.class_names = std::move(class_names);
  r.mean_classes = std::move(mean_classes);
  r.tiles = std::move(tiles);
  return r;
}

namespace {

std::string percent(double v, bool undefined) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%s", 100.0 * v, undefined ? "*" : "");
  return buf;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename F>
void for_each_scope(const EvalReport& r, F&& fn) {
  for (const auto& t : r.tiles) fn("tile:" + t.id, t.cm);
  fn(std::string("aggregate"), r.aggregate);
}

}  // namespace

std::string format_text(const EvalReport& report) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"scope"};
  for (const auto& n : report.class_names) header.push_back(n);
  header.push_back("mean_f1(" + std::to_string(report.mean_classes.size()) + ")");
  header.push_back("oa");
  rows.push_back(header);
  bool any_undefined = false;
  for_each_scope(report, [&](const std::string& scope, const ConfusionMatrix& cm) {
    std::vector<std::string> row{scope};
    for (int c = 0; c < cm.classes(); ++c) {
      const auto s = class_prf(cm, c);
      any_undefined |= s.undefined;
      row.push_back(percent(s.f1, s.undefined));
    }
    bool mean_undefined = false;
    for (int c : report.mean_classes) mean_undefined |= class_prf(cm, c).undefined;
    row.push_back(percent(mean_f1(cm, report.mean_classes), mean_undefined));
    row.push_back(cm.total() == 0 ? "-" : percent(overall_accuracy(cm), false));
    rows.push_back(std::move(row));
  });
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        os << row[i] << std::string(width[i] - row[i].size(), ' ');
      } else {
        os << "  " << std::string(width[i] - row[i].size(), ' ') << row[i];
      }
    }
    os << '\n';
  }
  if (any_undefined) os << "* includes a 0/0 ratio reported as 0\n";
  return os.str();
}

std::string format_csv(const EvalReport& report) {
  std::ostringstream os;
  os << "scope,class,precision,recall,f1,oa\n";
  for_each_scope(report, [&](const std::string& scope, const ConfusionMatrix& cm) {
    for (int c = 0; c < cm.classes(); ++c) {
      const auto s = class_prf(cm, c);
      os << scope << ',' << report.class_names[static_cast<std::size_t>(c)] << ',' << exact(s.precision) << ','
         << exact(s.recall) << ',' << exact(s.f1) << ",\n";
    }
    os << scope << ",mean,,," << exact(mean_f1(cm, report.mean_classes)) << ','
       << (cm.total() == 0 ? std::string() : exact(overall_accuracy(cm))) << '\n';
  });
  return os.str();
}

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<CsvRow> out;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "scope,class,precision,recall,f1,oa") throw ParseError("metrics CSV: unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string part; std::getline(ss, part, ',');) f.push_back(part);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": expected 6 fields");
    auto num = [&](const std::string& s) {
      if (s.empty()) return 0.0;
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (*end != '\0') throw ParseError("metrics CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
      return v;
    };
    out.push_back({f[0], f[1], num(f[2]), num(f[3]), num(f[4]), num(f[5])});
  }
  return out;
}

}  // namespace afnet::eval
