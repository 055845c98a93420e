#pragma once

#include <cstdio>
#include <mutex>
#include <string>
#include <vector>

#include "bcpgraph/graph.hpp"
#include "bcpgraph/posterior.hpp"

namespace bcpg {

struct SceneSpec;
struct ExperimentResult;

// Writes content to path via a temp file + rename.
void write_file_atomic(const std::string& path, const std::string& content);

// Scene files: a rows x cols CSV of block ids plus a JSON sidecar
// (same stem, .json) holding {name, block_means, sigma}.
void save_scene(const SceneSpec& spec, const std::string& csv_path);
SceneSpec load_scene(const std::string& csv_path);

// Edge-list CSV, header "from,to"; node count is max id + 1.
Graph load_edge_list_csv(const std::string& path);
// Coordinate CSV, header "id,x,y" (or "id,lon,lat"); row order defines node
// ids. Builds the Euclidean minimum spanning tree.
Graph load_coords_csv_as_mst(const std::string& path);

// Per-node posterior CSV. Univariate header:
//   id,y,posterior_mean,posterior_var,node_boundary_prob[,cp_prob]
// with cp_prob "na" in the first row. Multivariate responses get suffixed
// column groups (y1..ym, posterior_mean1.., posterior_var1..).
void write_posterior_csv(const PosteriorSummary& summary,
                         const std::vector<double>& y_flat,
                         const std::string& path);

// Streaming results CSV with the sweep schema; every append is flushed.
class ResultsCsvWriter {
 public:
  explicit ResultsCsvWriter(const std::string& path);
  ~ResultsCsvWriter();
  ResultsCsvWriter(const ResultsCsvWriter&) = delete;
  ResultsCsvWriter& operator=(const ResultsCsvWriter&) = delete;

  void append(const ExperimentResult& result);

 private:
  std::FILE* file_ = nullptr;
  std::mutex mutex_;
};

}  // namespace bcpg
