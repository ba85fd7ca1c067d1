#include "drag/eval.hpp"

#include <algorithm>
#include <cmath>

#include "drag/errors.hpp"
#include "json.hpp"

namespace drag {

namespace {

// Sorted before summing so aggregation is exactly permutation-invariant.
double sorted_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

RetrievalEvalReport compute_retrieval_metrics(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rankings,
    const std::map<std::string, std::string>& ground_truth) {
  if (rankings.empty())
    throw_error(ErrorKind::EmptyRankings, "no rankings to evaluate");

  RetrievalEvalReport report;
  std::vector<double> reciprocal, at1, at5;
  for (const auto& [query, ranking] : rankings) {
    auto gt = ground_truth.find(query);
    if (gt == ground_truth.end())
      throw_error(ErrorKind::MissingGroundTruth,
                  "no ground truth for query '" + query + "'");
    size_t rank = 0;
    for (size_t i = 0; i < ranking.size(); ++i) {
      if (ranking[i] == gt->second) {
        rank = i + 1;
        break;
      }
    }
    report.per_query_rank.emplace_back(query, rank);
    reciprocal.push_back(rank ? 1.0 / static_cast<double>(rank) : 0.0);
    at1.push_back(rank == 1 ? 1.0 : 0.0);
    at5.push_back(rank >= 1 && rank <= 5 ? 1.0 : 0.0);
  }
  report.mrr = sorted_mean(reciprocal);
  report.recall_at_1 = sorted_mean(at1);
  report.recall_at_5 = sorted_mean(at5);
  report.accuracy = report.recall_at_1;
  report.f1 = report.recall_at_1;
  return report;
}

std::string retrieval_report_to_json(const RetrievalEvalReport& report) {
  nlohmann::ordered_json j;
  j["mrr"] = report.mrr;
  j["accuracy"] = report.accuracy;
  j["recall_at_1"] = report.recall_at_1;
  j["recall_at_5"] = report.recall_at_5;
  j["f1"] = report.f1;
  auto ranks = nlohmann::ordered_json::array();
  for (const auto& [query, rank] : report.per_query_rank) {
    nlohmann::ordered_json r;
    r["query_id"] = query;
    if (rank)
      r["rank"] = rank;
    else
      r["rank"] = nullptr;
    ranks.push_back(r);
  }
  j["per_query"] = ranks;
  return j.dump(2);
}

JudgeVerdict parse_judge_verdict(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorKind::MalformedJson,
                "verdict JSON syntax error at byte " + std::to_string(e.byte));
  }
  if (!j.is_object())
    throw_error(ErrorKind::SchemaViolation, "$: verdict must be an object");

  auto scores_it = j.find("scores");
  if (scores_it == j.end() || !scores_it->is_object())
    throw_error(ErrorKind::SchemaViolation, "$.scores: missing or not an object");

  JudgeVerdict v;
  for (size_t i = 0; i < kJudgeScoreKeys.size(); ++i) {
    auto it = scores_it->find(kJudgeScoreKeys[i]);
    if (it == scores_it->end() || !it->is_number())
      throw_error(ErrorKind::SchemaViolation,
                  std::string("$.scores.") + kJudgeScoreKeys[i] +
                      ": missing or not a number");
    double s = it->get<double>();
    if (s < 0 || s > 10)
      throw_error(ErrorKind::SchemaViolation,
                  std::string("$.scores.") + kJudgeScoreKeys[i] +
                      ": outside [0,10]");
    v.scores[i] = s;
  }

  auto overall = j.find("overall");
  if (overall == j.end() || !overall->is_number())
    throw_error(ErrorKind::SchemaViolation, "$.overall: missing or not a number");
  v.overall = overall->get<double>();
  if (v.overall < 0 || v.overall > 10)
    throw_error(ErrorKind::SchemaViolation, "$.overall: outside [0,10]");

  auto read_strings = [&](const char* key, std::vector<std::string>& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array())
      throw_error(ErrorKind::SchemaViolation,
                  std::string("$.") + key + ": missing or not an array");
    for (const auto& s : *it) {
      if (!s.is_string())
        throw_error(ErrorKind::SchemaViolation,
                    std::string("$.") + key + ": non-string entry");
      out.push_back(s.get<std::string>());
    }
  };
  read_strings("strengths", v.strengths);
  read_strings("weaknesses", v.weaknesses);

  auto fix = j.find("most_important_fix");
  if (fix == j.end() || !fix->is_string())
    throw_error(ErrorKind::SchemaViolation,
                "$.most_important_fix: missing or not a string");
  v.most_important_fix = fix->get<std::string>();
  return v;
}

JudgeAggregate aggregate_judge_verdicts(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty())
    throw_error(ErrorKind::EmptyInput, "no verdicts to aggregate");
  JudgeAggregate agg;
  agg.count = verdicts.size();
  for (size_t i = 0; i < kJudgeScoreKeys.size(); ++i) {
    std::vector<double> values;
    values.reserve(verdicts.size());
    for (const auto& v : verdicts) values.push_back(v.scores[i]);
    agg.mean_scores[i] = sorted_mean(values);
  }
  std::vector<double> overall;
  overall.reserve(verdicts.size());
  for (const auto& v : verdicts) overall.push_back(v.overall);
  agg.judge_overall_mean = sorted_mean(overall);
  double sum = 0;
  for (double m : agg.mean_scores) sum += m;
  agg.mean_of_eight = sum / static_cast<double>(agg.mean_scores.size());
  return agg;
}

std::string judge_aggregate_to_json(const JudgeAggregate& aggregate) {
  nlohmann::ordered_json j;
  j["count"] = aggregate.count;
  nlohmann::ordered_json scores;
  for (size_t i = 0; i < kJudgeScoreKeys.size(); ++i)
    scores[kJudgeScoreKeys[i]] = aggregate.mean_scores[i];
  j["mean_scores"] = scores;
  j["judge_overall_mean"] = aggregate.judge_overall_mean;
  j["mean_of_eight"] = aggregate.mean_of_eight;
  return j.dump(2);
}

}  // namespace drag
