#include "vsir/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <unordered_set>

#include "vsir/error.hpp"
#include "vsir/log.hpp"

namespace vsir {
namespace {

std::size_t count_relevant(const Judgments& judged) {
  std::size_t r = 0;
  for (const auto& [doc, grade] : judged) r += grade > 0 ? 1 : 0;
  if (r == 0) throw std::invalid_argument("query has no relevant documents");
  return r;
}

int grade_of(const Judgments& judged, const std::string& doc) {
  const auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

// Grades of the first `depth` distinct documents.
std::vector<int> ranked_grades(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t depth) {
  std::vector<int> grades;
  std::unordered_set<std::string_view> seen;
  for (const auto& e : ranking) {
    if (grades.size() >= depth) break;
    if (!seen.insert(e.doc_id).second) continue;
    grades.push_back(grade_of(judged, e.doc_id));
  }
  return grades;
}

double dcg(std::span<const int> grades) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    acc += (std::exp2(static_cast<double>(grades[i])) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return acc;
}

}  // namespace

double average_precision(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t cutoff) {
  const auto total = count_relevant(judged);
  const auto grades = ranked_grades(ranking, judged, cutoff);
  double acc = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] <= 0) continue;
    ++hits;
    acc += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return acc / static_cast<double>(total);
}

double ndcg_at(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t k) {
  count_relevant(judged);
  const auto grades = ranked_grades(ranking, judged, k);
  std::vector<int> ideal;
  for (const auto& [doc, grade] : judged) {
    if (grade > 0) ideal.push_back(grade);
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  if (ideal.size() > k) ideal.resize(k);
  const double best = dcg(ideal);
  return best == 0.0 ? 0.0 : dcg(grades) / best;
}

double precision_at(const std::vector<RunEntry>& ranking, const Judgments& judged, std::size_t k) {
  if (k == 0) throw std::invalid_argument("precision depth must be positive");
  count_relevant(judged);
  const auto grades = ranked_grades(ranking, judged, k);
  const auto hits = std::count_if(grades.begin(), grades.end(), [](int g) { return g > 0; });
  return static_cast<double>(hits) / static_cast<double>(k);
}

double reciprocal_rank(const std::vector<RunEntry>& ranking, const Judgments& judged) {
  count_relevant(judged);
  const auto grades = ranked_grades(ranking, judged, ranking.size());
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] > 0) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

std::string Metric::name() const {
  switch (kind) {
    case MetricKind::map:
      return depth == 1000 ? "map" : "map@" + std::to_string(depth);
    case MetricKind::ndcg:
      return "ndcg@" + std::to_string(depth);
    case MetricKind::precision:
      return "p@" + std::to_string(depth);
    case MetricKind::mrr:
      return "mrr";
  }
  return "?";
}

double Metric::evaluate(const std::vector<RunEntry>& ranking, const Judgments& judged) const {
  switch (kind) {
    case MetricKind::map:
      return average_precision(ranking, judged, depth);
    case MetricKind::ndcg:
      return ndcg_at(ranking, judged, depth);
    case MetricKind::precision:
      return precision_at(ranking, judged, depth);
    case MetricKind::mrr:
      return reciprocal_rank(ranking, judged);
  }
  throw std::invalid_argument("unknown metric");
}

Metric parse_metric(std::string_view text) {
  const auto at = text.find('@');
  const auto base = text.substr(0, at);
  std::size_t depth = 0;
  if (at != std::string_view::npos) {
    const auto digits = text.substr(at + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), depth);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || depth == 0) {
      throw ConfigError("invalid metric depth in '" + std::string(text) + "'");
    }
  }
  if (base == "map") return {MetricKind::map, depth == 0 ? 1000 : depth};
  if (base == "mrr" && depth == 0) return {MetricKind::mrr, 0};
  if (base == "ndcg" && depth > 0) return {MetricKind::ndcg, depth};
  if (base == "p" && depth > 0) return {MetricKind::precision, depth};
  throw ConfigError("unknown metric '" + std::string(text) + "'");
}

std::vector<Metric> parse_metric_list(std::string_view comma_separated) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    const auto end = std::min(comma_separated.find(',', start), comma_separated.size());
    const auto item = comma_separated.substr(start, end - start);
    if (!item.empty()) out.push_back(parse_metric(item));
    start = end + 1;
  }
  if (out.empty()) throw ConfigError("no metrics requested");
  return out;
}

Evaluation evaluate_run(const Run& run, const Qrels& qrels, const std::vector<Metric>& metrics) {
  Evaluation ev;
  for (const auto& m : metrics) ev.metric_names.push_back(m.name());
  ev.means.assign(metrics.size(), 0.0);
  const std::vector<RunEntry> empty;
  for (const auto& [qid, judged] : qrels) {
    const bool any_relevant =
        std::any_of(judged.begin(), judged.end(), [](const auto& j) { return j.second > 0; });
    if (!any_relevant) {
      warn("query " + qid + " has no relevant documents; excluded from evaluation");
      continue;
    }
    const auto it = run.find(qid);
    const auto& ranking = it == run.end() ? empty : it->second;
    auto& values = ev.per_query[qid];
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      values.push_back(metrics[i].evaluate(ranking, judged));
      ev.means[i] += values.back();
    }
  }
  if (!ev.per_query.empty()) {
    for (auto& v : ev.means) v /= static_cast<double>(ev.per_query.size());
  }
  return ev;
}

}  // namespace vsir
