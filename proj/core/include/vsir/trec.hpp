#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace vsir {

struct RunEntry {
  std::string query_id;
  std::string doc_id;
  std::size_t rank = 0;  // 1-based
  double score = 0.0;

  friend bool operator==(const RunEntry&, const RunEntry&) = default;
};

/// Ranked lists keyed by query id; each list is ordered by rank.
using Run = std::map<std::string, std::vector<RunEntry>>;

/// Relevance grades keyed by query id, then doc id.
using Qrels = std::map<std::string, std::map<std::string, int>>;

/// `query_id Q0 doc_id rank score tag` lines, queries in key order.
void write_run(std::ostream& out, const Run& run, const std::string& tag);
void write_run_entries(std::ostream& out, const std::vector<RunEntry>& entries, const std::string& tag);

/// Reads TREC run lines. Entries are re-sorted by rank within each query.
Run read_run(std::istream& in);

/// Reads `query_id 0 doc_id grade` lines; duplicates are an error.
Qrels read_qrels(std::istream& in);

}  // namespace vsir
