#include "bcpgraph/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bcpgraph/errors.hpp"
#include "bcpgraph/harness.hpp"

namespace bcpg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& tok, std::int64_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw IoError("parse error at row " + std::to_string(row) +
                  ": bad number '" + tok + "'");
  }
}

std::int64_t parse_int(const std::string& tok, std::int64_t row) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw IoError("parse error at row " + std::to_string(row) +
                  ": bad integer '" + tok + "'");
  }
}

std::string sidecar_path(const std::string& csv_path) {
  const std::size_t dot = csv_path.rfind('.');
  const std::string stem =
      (dot == std::string::npos) ? csv_path : csv_path.substr(0, dot);
  return stem + ".json";
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out << content;
    if (!out) throw IoError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw IoError("rename failed: " + tmp + " -> " + path);
  }
}

void save_scene(const SceneSpec& spec, const std::string& csv_path) {
  spec.validate();
  std::ostringstream csv;
  for (std::int64_t r = 0; r < spec.rows; ++r) {
    for (std::int64_t c = 0; c < spec.cols; ++c) {
      if (c) csv << ',';
      csv << spec.block_map[r * spec.cols + c];
    }
    csv << '\n';
  }
  write_file_atomic(csv_path, csv.str());

  nlohmann::json side;
  side["name"] = spec.name;
  side["block_means"] = spec.block_means;
  side["sigma"] = spec.sigma;
  write_file_atomic(sidecar_path(csv_path), side.dump(2) + "\n");
}

SceneSpec load_scene(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open scene: " + csv_path);
  SceneSpec spec;
  std::string line;
  std::int64_t row = 0;
  std::int64_t cols = -1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto toks = split_csv_line(line);
    if (cols < 0) {
      cols = static_cast<std::int64_t>(toks.size());
    } else if (static_cast<std::int64_t>(toks.size()) != cols) {
      throw IoError("parse error at row " + std::to_string(row) +
                    ": ragged scene row");
    }
    for (const auto& tok : toks) {
      spec.block_map.push_back(static_cast<std::int32_t>(parse_int(trim(tok), row)));
    }
    ++spec.rows;
  }
  spec.cols = cols < 0 ? 0 : cols;

  std::ifstream side_in(sidecar_path(csv_path));
  if (!side_in) throw IoError("missing scene sidecar: " + sidecar_path(csv_path));
  nlohmann::json side;
  try {
    side_in >> side;
  } catch (const std::exception& e) {
    throw IoError("bad scene sidecar: " + std::string(e.what()));
  }
  spec.name = side.value("name", csv_path);
  spec.sigma = side.value("sigma", 1.0);
  spec.block_means = side.at("block_means").get<std::vector<double>>();
  spec.validate();
  return spec;
}

Graph load_edge_list_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list: " + path);
  std::string line;
  std::int64_t row = 0;
  std::vector<Edge> edges;
  std::int64_t max_id = -1;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto toks = split_csv_line(t);
    if (!header_seen) {
      header_seen = true;
      if (toks.size() < 2 || trim(toks[0]) != "from" || trim(toks[1]) != "to") {
        throw IoError("parse error at row " + std::to_string(row) +
                      ": expected header 'from,to'");
      }
      continue;
    }
    if (toks.size() < 2) {
      throw IoError("parse error at row " + std::to_string(row) + ": need two columns");
    }
    const std::int64_t u = parse_int(trim(toks[0]), row);
    const std::int64_t v = parse_int(trim(toks[1]), row);
    max_id = std::max({max_id, u, v});
    edges.emplace_back(static_cast<std::int32_t>(u), static_cast<std::int32_t>(v));
  }
  if (max_id < 0) throw IoError("edge list is empty: " + path);
  return Graph::from_edge_list(max_id + 1, edges);
}

Graph load_coords_csv_as_mst(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open coordinates: " + path);
  std::string line;
  std::int64_t row = 0;
  std::vector<double> xs, ys;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto toks = split_csv_line(t);
    if (!header_seen) {
      header_seen = true;
      if (toks.size() < 3 || trim(toks[0]) != "id") {
        throw IoError("parse error at row " + std::to_string(row) +
                      ": expected header 'id,x,y' or 'id,lon,lat'");
      }
      continue;
    }
    if (toks.size() < 3) {
      throw IoError("parse error at row " + std::to_string(row) + ": need three columns");
    }
    xs.push_back(parse_double(trim(toks[1]), row));
    ys.push_back(parse_double(trim(toks[2]), row));
  }
  if (xs.empty()) throw IoError("coordinate file is empty: " + path);
  return Graph::mst_from_coords(xs, ys);
}

void write_posterior_csv(const PosteriorSummary& summary,
                         const std::vector<double>& y_flat,
                         const std::string& path) {
  const std::int64_t n = summary.n;
  const std::int64_t m = summary.m;
  const bool path_mode = summary.mode != SummaryMode::graph;
  std::ostringstream out;
  out << "id";
  if (m == 1) {
    out << ",y,posterior_mean,posterior_var";
  } else {
    for (std::int64_t j = 1; j <= m; ++j) out << ",y" << j;
    for (std::int64_t j = 1; j <= m; ++j) out << ",posterior_mean" << j;
    for (std::int64_t j = 1; j <= m; ++j) out << ",posterior_var" << j;
  }
  out << ",node_boundary_prob";
  if (path_mode) out << ",cp_prob";
  out << '\n';
  out.precision(12);
  for (std::int64_t i = 0; i < n; ++i) {
    out << i;
    for (std::int64_t j = 0; j < m; ++j) out << ',' << y_flat[i * m + j];
    for (std::int64_t j = 0; j < m; ++j) out << ',' << summary.posterior_mean[i * m + j];
    for (std::int64_t j = 0; j < m; ++j) out << ',' << summary.posterior_var[i * m + j];
    out << ',' << summary.node_boundary_prob[i];
    if (path_mode) {
      if (i == 0) {
        out << ",na";  // the first position always starts a block
      } else {
        out << ',' << summary.cp_prob[i];
      }
    }
    out << '\n';
  }
  write_file_atomic(path, out.str());
}

ResultsCsvWriter::ResultsCsvWriter(const std::string& path) {
  file_ = std::fopen(path.c_str(), "w");
  if (!file_) throw IoError("cannot open results csv: " + path);
  std::fputs("scene,method,alpha,seed,mse,runtime_s,mean_blocks\n", file_);
  std::fflush(file_);
}

ResultsCsvWriter::~ResultsCsvWriter() {
  if (file_) std::fclose(file_);
}

void ResultsCsvWriter::append(const ExperimentResult& r) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::fprintf(file_, "%s,%s,%g,%" PRIu64 ",%.8g,%.4f,%.4f\n", r.scene.c_str(),
               r.method.c_str(), r.alpha, r.seed, r.mse, r.runtime_s,
               r.mean_blocks);
  std::fflush(file_);
}

}  // namespace bcpg
