#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace drag {

struct RetrievalEvalReport {
  double mrr = 0;
  double accuracy = 0;
  double recall_at_1 = 0;
  double recall_at_5 = 0;
  double f1 = 0;
  // 1-based rank of the ground truth per query; 0 = not retrieved.
  std::vector<std::pair<std::string, size_t>> per_query_rank;
};

// rank = 1-based position of the ground-truth id (missing contributes 0 to
// every metric). accuracy and f1 both equal recall@1 in the one-relevant-item
// regime. Throws EmptyRankings / MissingGroundTruth(query).
RetrievalEvalReport compute_retrieval_metrics(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& rankings,
    const std::map<std::string, std::string>& ground_truth);

std::string retrieval_report_to_json(const RetrievalEvalReport& report);

inline constexpr std::array<const char*, 8> kJudgeScoreKeys = {
    "aesthetic_quality", "visual_expressiveness", "professional_polish",
    "clarity", "logical_flow", "accuracy", "completeness", "appropriateness"};

struct JudgeVerdict {
  std::array<double, 8> scores{};  // ordered as kJudgeScoreKeys
  double overall = 0;
  std::vector<std::string> strengths;
  std::vector<std::string> weaknesses;
  std::string most_important_fix;
};

// Parses one JSON object; all eight score keys and every schema field are
// required, scores and overall must lie in [0,10]. Never crashes on
// arbitrary bytes; throws MalformedJson / SchemaViolation(path).
JudgeVerdict parse_judge_verdict(const std::string& text);

struct JudgeAggregate {
  size_t count = 0;
  std::array<double, 8> mean_scores{};
  double judge_overall_mean = 0;  // mean of the judge-reported overall
  double mean_of_eight = 0;       // mean of the eight sub-metric means
};

JudgeAggregate aggregate_judge_verdicts(const std::vector<JudgeVerdict>& verdicts);

std::string judge_aggregate_to_json(const JudgeAggregate& aggregate);

}  // namespace drag
