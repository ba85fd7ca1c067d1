#include <algorithm>
#include <random>

#include "doctest.h"
#include "drag/errors.hpp"
#include "drag/eval.hpp"
#include "drag/hash.hpp"
#include "helpers.hpp"

using namespace drag;

namespace {

std::string judge_json(const std::array<double, 8>& scores, double overall) {
  std::string s = "{\"scores\":{";
  for (size_t i = 0; i < scores.size(); ++i) {
    if (i) s += ",";
    s += "\"" + std::string(kJudgeScoreKeys[i]) + "\":" + std::to_string(scores[i]);
  }
  s += "},\"overall\":" + std::to_string(overall) +
       ",\"strengths\":[],\"weaknesses\":[],\"most_important_fix\":\"\"}";
  return s;
}

}  // namespace

TEST_CASE("metrics: hand-computed three-query example") {
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings{
      {"q1", {"gt1", "b", "c", "d"}},
      {"q2", {"b", "gt2", "c", "d"}},
      {"q3", {"b", "c", "d", "gt3"}},
  };
  std::map<std::string, std::string> gt{{"q1", "gt1"}, {"q2", "gt2"}, {"q3", "gt3"}};
  RetrievalEvalReport r = compute_retrieval_metrics(rankings, gt);
  CHECK(r.mrr == doctest::Approx(7.0 / 12.0));
  CHECK(r.recall_at_1 == doctest::Approx(1.0 / 3.0));
  CHECK(r.recall_at_5 == doctest::Approx(1.0));
  CHECK(r.accuracy == r.recall_at_1);
  CHECK(r.f1 == r.recall_at_1);
}

TEST_CASE("metrics: perfect retrieval") {
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings{
      {"a", {"a"}}, {"b", {"b"}}};
  std::map<std::string, std::string> gt{{"a", "a"}, {"b", "b"}};
  RetrievalEvalReport r = compute_retrieval_metrics(rankings, gt);
  CHECK(r.mrr == 1.0);
  CHECK(r.recall_at_1 == 1.0);
  CHECK(r.recall_at_5 == 1.0);
}

TEST_CASE("metrics: missing ground truth in a ranking contributes zero") {
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings{
      {"a", {"x", "y"}}, {"b", {"b"}}};
  std::map<std::string, std::string> gt{{"a", "gone"}, {"b", "b"}};
  RetrievalEvalReport r = compute_retrieval_metrics(rankings, gt);
  CHECK(r.mrr == doctest::Approx(0.5));
  CHECK(r.per_query_rank[0].second == 0);
}

TEST_CASE("metrics: structured errors") {
  CHECK_THROWS_AS(compute_retrieval_metrics({}, {}), Error);
  std::vector<std::pair<std::string, std::vector<std::string>>> rankings{
      {"q", {"a"}}};
  try {
    compute_retrieval_metrics(rankings, {});
    FAIL("expected MissingGroundTruth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MissingGroundTruth);
    CHECK(std::string(e.what()).find("q") != std::string::npos);
  }
}

TEST_CASE("metrics: bounds hold on random instances") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    size_t pool = 3 + rng.next_below(20);
    std::vector<std::string> ids;
    for (size_t i = 0; i < pool; ++i) ids.push_back("d" + std::to_string(i));
    std::vector<std::pair<std::string, std::vector<std::string>>> rankings;
    std::map<std::string, std::string> gt;
    size_t queries = 1 + rng.next_below(10);
    for (size_t q = 0; q < queries; ++q) {
      auto ranking = ids;
      for (size_t i = ranking.size(); i > 1; --i)
        std::swap(ranking[i - 1], ranking[rng.next_below(i)]);
      std::string qid = "q" + std::to_string(q);
      gt[qid] = ids[rng.next_below(pool)];
      rankings.emplace_back(qid, ranking);
    }
    RetrievalEvalReport r = compute_retrieval_metrics(rankings, gt);
    CHECK(r.recall_at_1 <= r.mrr + 1e-12);
    CHECK(r.mrr <= 1.0 + 1e-12);
    CHECK(r.recall_at_1 <= r.recall_at_5 + 1e-12);
  }
}

TEST_CASE("judge: zeroed schema skeleton is valid") {
  JudgeVerdict v = parse_judge_verdict(judge_json({0, 0, 0, 0, 0, 0, 0, 0}, 0));
  CHECK(v.overall == 0.0);
  for (double s : v.scores) CHECK(s == 0.0);
}

TEST_CASE("judge: missing key is named") {
  std::string text = judge_json({1, 2, 3, 4, 5, 6, 7, 8}, 5);
  auto pos = text.find("\"completeness\"");
  text.replace(pos, std::string("\"completeness\"").size(), "\"completenessX\"");
  try {
    parse_judge_verdict(text);
    FAIL("expected SchemaViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
    CHECK(std::string(e.what()).find("completeness") != std::string::npos);
  }
}

TEST_CASE("judge: scores outside [0,10] are rejected") {
  CHECK_THROWS_AS(parse_judge_verdict(judge_json({11, 0, 0, 0, 0, 0, 0, 0}, 0)),
                  Error);
  CHECK_THROWS_AS(parse_judge_verdict(judge_json({0, 0, 0, 0, 0, 0, 0, 0}, 11)),
                  Error);
}

TEST_CASE("judge: trailing content is rejected") {
  std::string text = judge_json({1, 1, 1, 1, 1, 1, 1, 1}, 1) + " tail";
  try {
    parse_judge_verdict(text);
    FAIL("expected MalformedJson");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedJson);
  }
}

TEST_CASE("judge: fuzzing never crashes") {
  SplitMix64 rng(29);
  for (int i = 0; i < 1000; ++i) {
    std::string bytes;
    size_t len = rng.next_below(80);
    for (size_t b = 0; b < len; ++b)
      bytes.push_back(static_cast<char>(rng.next_below(256)));
    try {
      parse_judge_verdict(bytes);
    } catch (const Error&) {
    }
  }
  CHECK(true);
}

TEST_CASE("judge aggregate: single verdict is its own mean") {
  JudgeVerdict v = parse_judge_verdict(judge_json({1, 2, 3, 4, 5, 6, 7, 8}, 4.5));
  JudgeAggregate agg = aggregate_judge_verdicts({v});
  CHECK(agg.count == 1);
  CHECK(agg.judge_overall_mean == doctest::Approx(4.5));
  CHECK(agg.mean_scores[0] == doctest::Approx(1.0));
  CHECK(agg.mean_of_eight == doctest::Approx(4.5));
}

TEST_CASE("judge aggregate: means over two verdicts") {
  JudgeVerdict a = parse_judge_verdict(judge_json({6, 6, 6, 6, 6, 6, 6, 6}, 6));
  JudgeVerdict b = parse_judge_verdict(judge_json({8, 8, 8, 8, 8, 8, 8, 8}, 8));
  JudgeAggregate agg = aggregate_judge_verdicts({a, b});
  CHECK(agg.mean_scores[5] == doctest::Approx(7.0));  // accuracy column
  CHECK(agg.judge_overall_mean == doctest::Approx(7.0));
}

TEST_CASE("judge aggregate: reported overall differs from the mean of eight") {
  // Eight sub-scores averaging 6.15625 alongside a reported overall of 6.188:
  // the two aggregates must stay distinct.
  JudgeVerdict v = parse_judge_verdict(judge_json(
      {6.625, 5.625, 6.625, 7.125, 6.375, 5.750, 5.625, 5.500}, 6.188));
  JudgeAggregate agg = aggregate_judge_verdicts({v});
  CHECK(agg.mean_of_eight == doctest::Approx(6.15625).epsilon(1e-9));
  CHECK(agg.judge_overall_mean == doctest::Approx(6.188));
  CHECK(agg.mean_of_eight != agg.judge_overall_mean);
}

TEST_CASE("judge aggregate: permutation-invariant") {
  SplitMix64 rng(31);
  std::vector<JudgeVerdict> verdicts;
  for (int i = 0; i < 12; ++i) {
    std::array<double, 8> scores;
    for (auto& s : scores) s = 10.0 * rng.next_real();
    verdicts.push_back(
        parse_judge_verdict(judge_json(scores, 10.0 * rng.next_real())));
  }
  JudgeAggregate base = aggregate_judge_verdicts(verdicts);
  std::mt19937 shuffler(5);
  std::shuffle(verdicts.begin(), verdicts.end(), shuffler);
  JudgeAggregate again = aggregate_judge_verdicts(verdicts);
  for (size_t i = 0; i < base.mean_scores.size(); ++i)
    CHECK(base.mean_scores[i] == again.mean_scores[i]);
  CHECK(base.judge_overall_mean == again.judge_overall_mean);
  CHECK_THROWS_AS(aggregate_judge_verdicts({}), Error);
}
