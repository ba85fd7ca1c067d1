#pragma once

#include <unistd.h>

#include <bit>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "drag/hash.hpp"
#include "drag/kg.hpp"

namespace testutil {

inline drag::NodeRecord make_node(const std::string& id, const std::string& name,
                                  drag::NodeType type = drag::NodeType::Module,
                                  double cx = 0.5, double cy = 0.5,
                                  drag::Importance importance = drag::Importance::Major) {
  drag::NodeRecord n;
  n.id = id;
  n.name = name;
  n.node_type = type;
  n.shape = drag::NodeShape::Rectangle;
  n.bbox = drag::BBox{cx - 0.04, cy - 0.03, cx + 0.04, cy + 0.03};
  n.center_x = n.bbox.center_x();
  n.center_y = n.bbox.center_y();
  n.importance = importance;
  return n;
}

inline drag::EdgeRecord make_edge(const std::string& source, const std::string& target,
                                  drag::PathType type = drag::PathType::Flow) {
  drag::EdgeRecord e;
  e.source = source;
  e.target = target;
  e.path_type = type;
  return e;
}

// in -> m1 -> ... -> out, evenly spaced left to right.
inline drag::TopologyGraph make_chain(const std::vector<std::string>& ids,
                                      const std::vector<drag::NodeType>& types) {
  drag::TopologyGraph g;
  g.diagram_id = "chain";
  for (size_t i = 0; i < ids.size(); ++i) {
    double cx = 0.1 + 0.8 * static_cast<double>(i) /
                          std::max<size_t>(1, ids.size() - 1);
    g.nodes.push_back(make_node(ids[i], ids[i], types[i], cx, 0.5));
  }
  for (size_t i = 0; i + 1 < ids.size(); ++i)
    g.edges.push_back(make_edge(ids[i], ids[i + 1]));
  return g;
}

// Random structurally messy record for normalization property tests:
// duplicate edges, out-of-range boxes, empty ids, dangling references.
inline drag::TopologyGraph make_messy_graph(uint64_t seed) {
  drag::SplitMix64 rng(seed);
  drag::TopologyGraph g;
  g.diagram_id = "messy-" + std::to_string(seed);
  size_t n = 2 + rng.next_below(8);
  for (size_t i = 0; i < n; ++i) {
    drag::NodeRecord node;
    node.id = rng.next_below(10) == 0 ? "" : "n" + std::to_string(i);
    node.name = "node " + std::to_string(rng.next_below(5));
    node.node_type = static_cast<drag::NodeType>(rng.next_below(12));
    node.shape = static_cast<drag::NodeShape>(rng.next_below(10));
    node.importance = static_cast<drag::Importance>(rng.next_below(4));
    double x1 = rng.next_real() * 2 - 0.5;
    double y1 = rng.next_real() * 2 - 0.5;
    node.bbox = drag::BBox{x1, y1, x1 + rng.next_real(), y1 + rng.next_real()};
    node.center_x = rng.next_real();
    node.center_y = rng.next_real();
    g.nodes.push_back(std::move(node));
  }
  size_t edges = rng.next_below(2 * n + 2);
  for (size_t i = 0; i < edges; ++i) {
    drag::EdgeRecord e;
    e.source = "n" + std::to_string(rng.next_below(n + 2));
    e.target = "n" + std::to_string(rng.next_below(n + 2));
    e.path_type = static_cast<drag::PathType>(rng.next_below(4));
    e.path_type_explicit = rng.next_below(2) == 0;
    g.edges.push_back(std::move(e));
    if (rng.next_below(4) == 0) g.edges.push_back(g.edges.back());
  }
  if (rng.next_below(2) == 0) {
    drag::GroupRecord gr;
    gr.group_id = "g0";
    gr.label = "group label";
    for (size_t i = 0; i < n; i += 2) gr.members.push_back("n" + std::to_string(i));
    gr.members.push_back("missing");
    g.groups.push_back(std::move(gr));
  }
  for (size_t i = 0; i < n; ++i)
    if (rng.next_below(3) == 0)
      g.layout.main_path.push_back("n" + std::to_string(rng.next_below(n + 2)));
  return g;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("drag_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::filesystem::path path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

// Runs the drag binary named by DRAG_BIN.
inline CliResult run_cli(const std::string& args, const TempDir& dir) {
  const char* bin = std::getenv("DRAG_BIN");
  if (!bin) return {-1, "DRAG_BIN not set"};
  std::string capture = dir.file("cli_output.txt");
  std::string command = std::string(bin) + " " + args + " > " + capture + " 2>&1";
  int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::FILE* f = std::fopen(capture.c_str(), "rb");
  if (f) {
    char buf[4096];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0)
      result.output.append(buf, got);
    std::fclose(f);
  }
  return result;
}

inline std::string source_dir() { return DRAG_SOURCE_DIR; }

}  // namespace testutil
