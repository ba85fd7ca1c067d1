// End-to-end checks of the drag binary (path in DRAG_BIN).

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "drag/binio.hpp"
#include "drag/kg.hpp"
#include "drag/svg.hpp"
#include "drag/synth.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace drag;
using testutil::run_cli;
using testutil::TempDir;

namespace {

std::string write_corpus(const TempDir& dir, size_t n, uint64_t seed) {
  std::string path = dir.file("kg.jsonl");
  std::string out;
  for (const auto& g : make_synthetic_corpus(n, seed))
    out += serialize_graph_record(g) + "\n";
  write_file_bytes(path, out);
  return path;
}

}  // namespace

TEST_CASE("cli: unknown subcommand exits 1 with usage") {
  TempDir dir("cli_unknown");
  auto r = run_cli("frobnicate", dir);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("Usage") != std::string::npos);
}

TEST_CASE("cli: variants generate is byte-deterministic and writes a manifest") {
  TempDir dir("cli_variants");
  std::string kg = write_corpus(dir, 5, 13);
  std::string out1 = dir.file("v1.jsonl");
  std::string out2 = dir.file("v2.jsonl");
  CHECK(run_cli("--seed 42 variants generate --in " + kg + " -o " + out1, dir)
            .exit_code == 0);
  CHECK(run_cli("--seed 42 variants generate --in " + kg + " -o " + out2, dir)
            .exit_code == 0);
  CHECK(read_file_bytes(out1) == read_file_bytes(out2));
  CHECK(std::filesystem::exists(out1 + ".manifest.json"));

  auto manifest = nlohmann::json::parse(read_file_bytes(out1 + ".manifest.json"));
  CHECK(manifest["seed"] == 42);
  CHECK(manifest["outputs"].contains(out1));
}

TEST_CASE("cli: seed changes the variant output") {
  TempDir dir("cli_seed");
  std::string kg = write_corpus(dir, 3, 14);
  std::string a = dir.file("a.jsonl"), b = dir.file("b.jsonl");
  run_cli("--seed 1 variants generate --in " + kg + " -o " + a, dir);
  run_cli("--seed 2 variants generate --in " + kg + " -o " + b, dir);
  CHECK(read_file_bytes(a) != read_file_bytes(b));
}

TEST_CASE("cli: kg normalize output is parseable and normalized") {
  TempDir dir("cli_kg");
  std::string raw = dir.file("raw.jsonl");
  write_file_bytes(
      raw,
      R"({"diagram_id":"d","graph":{"nodes":[{"id":"a","bbox":[-0.5,0,2,1]},{"id":"b"},{"id":""}],"edges":[{"source":"a","target":"b"},{"source":"a","target":"b"}]}})"
      "\n");
  std::string out = dir.file("norm.jsonl");
  auto r = run_cli("kg normalize --in " + raw + " -o " + out, dir);
  CHECK(r.exit_code == 0);
  auto lines = read_file_bytes(out);
  TopologyGraph g = parse_graph_record(lines.substr(0, lines.find('\n')));
  CHECK(g.nodes.size() == 2);
  CHECK(g.edges.size() == 1);
  CHECK(validate_graph(g).ok());
}

TEST_CASE("cli: hash embed, index build, index query round-trip") {
  TempDir dir("cli_index");
  std::string kg = write_corpus(dir, 8, 15);
  std::string emb = dir.file("emb.drix");
  std::string idx = dir.file("idx.drin");
  CHECK(run_cli("embed hash --in " + kg + " --dim 64 -o " + emb, dir).exit_code == 0);
  CHECK(run_cli("index build --embeddings " + emb + " -o " + idx, dir).exit_code == 0);
  auto r = run_cli("index query --idx " + idx + " --query synth-003 -k 3", dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.output.substr(r.output.find('{')));
  CHECK(j["query_id"] == "synth-003");
  REQUIRE(j["results"].size() == 3);
  CHECK(j["results"][0]["id"] == "synth-003");  // self-retrieval
}

TEST_CASE("cli: variants render writes one svg per record") {
  TempDir dir("cli_render");
  std::string kg = write_corpus(dir, 2, 16);
  std::string variants = dir.file("v.jsonl");
  run_cli("--seed 7 variants generate --in " + kg + " -o " + variants, dir);
  std::string svg_dir = dir.file("svg");
  auto r = run_cli("variants render --in " + variants + " --out-dir " + svg_dir, dir);
  CHECK(r.exit_code == 0);
  size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(svg_dir))
    if (entry.path().extension() == ".svg") ++count;
  CHECK(count == 10);  // 2 diagrams x 5 variants
  CHECK(std::filesystem::exists(svg_dir + "/synth-000.layout_jitter.svg"));
}

TEST_CASE("cli: loss aggregate emits all variants") {
  TempDir dir("cli_loss");
  std::string kg = write_corpus(dir, 4, 17);
  std::string variants = dir.file("v.jsonl");
  run_cli("variants generate --in " + kg + " -o " + variants, dir);
  std::string summary = dir.file("summary.json");
  auto r = run_cli("loss aggregate --in " + variants + " -o " + summary, dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(read_file_bytes(summary));
  for (const char* kind : {"light_skeleton", "medium_missing", "coarse_layout",
                           "text_reduced", "layout_jitter"})
    CHECK(j[kind]["count"] == 4);
}

TEST_CASE("cli: prompts assemble honors the ablation flags") {
  TempDir dir("cli_prompts");
  std::string templates = testutil::source_dir() + "/assets/prompts";
  std::string base = "prompts assemble --sketch s.png --refs r1 r2 r3 --templates " +
                     templates;
  auto full = run_cli(base, dir);
  CHECK(full.exit_code == 0);
  auto j = nlohmann::json::parse(full.output.substr(full.output.find('{')));
  CHECK(j["attachments"].size() == 4);

  auto no_style = run_cli(base + " --no-style-agent", dir);
  auto j2 = nlohmann::json::parse(no_style.output.substr(no_style.output.find('{')));
  CHECK(j2["request_id"] != j["request_id"]);
  std::string user = j2["user"].get<std::string>();
  CHECK(user.find("Visual Guidance images follow") == std::string::npos);
}

TEST_CASE("cli: eval retrieval matches the hand example") {
  TempDir dir("cli_eval");
  std::string rankings = dir.file("rankings.jsonl");
  std::string gt = dir.file("gt.jsonl");
  write_file_bytes(rankings,
                   R"({"query_id":"q1","ranking":["g1","x"]})" "\n"
                   R"({"query_id":"q2","ranking":["x","g2"]})" "\n");
  write_file_bytes(gt,
                   R"({"query_id":"q1","diagram_id":"g1"})" "\n"
                   R"({"query_id":"q2","diagram_id":"g2"})" "\n");
  auto r = run_cli("eval retrieval --rankings " + rankings + " --gt " + gt, dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.output.substr(r.output.find('{')));
  CHECK(j["mrr"] == doctest::Approx(0.75));
  CHECK(j["recall_at_1"] == doctest::Approx(0.5));
}

TEST_CASE("cli: eval judge aggregates a verdict file") {
  TempDir dir("cli_judge");
  std::string verdicts = dir.file("verdicts.jsonl");
  std::string line =
      R"({"scores":{"aesthetic_quality":6,"visual_expressiveness":6,)"
      R"("professional_polish":6,"clarity":6,"logical_flow":6,"accuracy":6,)"
      R"("completeness":6,"appropriateness":6},"overall":6.5,)"
      R"("strengths":[],"weaknesses":[],"most_important_fix":""})";
  write_file_bytes(verdicts, line + "\n" + line + "\n");
  auto r = run_cli("eval judge --verdicts " + verdicts, dir);
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(r.output.substr(r.output.find('{')));
  CHECK(j["count"] == 2);
  CHECK(j["mean_of_eight"] == doctest::Approx(6.0));
  CHECK(j["judge_overall_mean"] == doctest::Approx(6.5));
}

TEST_CASE("cli: bad input file exits 1") {
  TempDir dir("cli_badfile");
  auto r = run_cli("kg normalize --in /nonexistent.jsonl -o " + dir.file("x"), dir);
  CHECK(r.exit_code == 1);
}
