#include "vsir/trec.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "vsir/error.hpp"

namespace vsir {
namespace {

std::vector<std::string> fields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string f; in >> f;) out.push_back(std::move(f));
  return out;
}

template <typename Int>
Int parse_int(const std::string& s, std::size_t line_no, const char* what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": invalid " + what + " '" + s + "'");
  }
  return v;
}

double parse_score(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw FormatError("line " + std::to_string(line_no) + ": invalid score '" + s + "'");
}

}  // namespace

void write_run_entries(std::ostream& out, const std::vector<RunEntry>& entries, const std::string& tag) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const auto& e : entries) {
    out << e.query_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << e.score << ' ' << tag << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void write_run(std::ostream& out, const Run& run, const std::string& tag) {
  for (const auto& [qid, entries] : run) write_run_entries(out, entries, tag);
}

Run read_run(std::istream& in) {
  Run run;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() != 6) throw FormatError("line " + std::to_string(line_no) + ": expected 6 run fields");
    run[f[0]].push_back({f[0], f[2], parse_int<std::size_t>(f[3], line_no, "rank"), parse_score(f[4], line_no)});
  }
  for (auto& [qid, entries] : run) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
  }
  return run;
}

Qrels read_qrels(std::istream& in) {
  Qrels qrels;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto f = fields(line);
    if (f.empty()) continue;
    if (f.size() != 4) throw FormatError("line " + std::to_string(line_no) + ": expected 4 qrels fields");
    const int grade = parse_int<int>(f[3], line_no, "grade");
    if (grade < 0) throw FormatError("line " + std::to_string(line_no) + ": negative relevance grade");
    if (!qrels[f[0]].emplace(f[2], grade).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate judgment for " + f[0] + "/" + f[2]);
    }
  }
  return qrels;
}

}  // namespace vsir
