// Command line front end for the change point analysis library. Talks to the
// core exclusively through the C API in bcpgraph.h; CSV/JSON/SVG handling for
// the command surface lives here.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bcpgraph.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RunError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad flag values are usage errors; anything arising from file contents or
// the fit itself is a runtime failure.
void check(bcpg_status status) {
  if (status == BCPG_OK) return;
  const std::string msg = bcpg_last_error();
  if (status == BCPG_ERROR_INVALID_ARGUMENT) throw UsageError(msg);
  throw RunError(msg);
}

void check_data(bcpg_status status) {
  if (status == BCPG_OK) return;
  throw RunError(bcpg_last_error());
}

// ---- small file helpers -------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot open for writing: " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw RunError("rename failed for " + path);
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
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

// ---- data CSV (schema: id,y[,y2..ym][,x1..xk]) ---------------------------

struct DataTable {
  std::vector<std::string> ids;
  std::int64_t n = 0;
  std::int64_t m = 0;  // response columns
  std::int64_t k = 0;  // predictor columns
  std::vector<double> y;  // n*m node-major
  std::vector<double> x;  // n*k node-major
};

DataTable read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RunError("cannot open data file: " + path);
  std::string line;
  std::int64_t row = 0;
  DataTable t;
  std::int64_t y_cols = 0, x_cols = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto toks = split(line, ',');
    if (t.m == 0 && row == 1) {
      if (trim(toks[0]) != "id") {
        throw RunError("parse error at row 1: expected header starting with 'id'");
      }
      std::size_t i = 1;
      while (i < toks.size()) {
        const std::string name = trim(toks[i]);
        if (name == "y" || (name.size() > 1 && name[0] == 'y' &&
                            std::isdigit(static_cast<unsigned char>(name[1])))) {
          ++y_cols;
          ++i;
        } else {
          break;
        }
      }
      while (i < toks.size()) {
        const std::string name = trim(toks[i]);
        if (name.size() > 1 && name[0] == 'x' &&
            std::isdigit(static_cast<unsigned char>(name[1]))) {
          ++x_cols;
          ++i;
        } else {
          throw RunError("parse error at row 1: unexpected column '" + name + "'");
        }
      }
      if (y_cols == 0) throw RunError("parse error at row 1: no response column");
      t.m = y_cols;
      t.k = x_cols;
      continue;
    }
    if (static_cast<std::int64_t>(toks.size()) != 1 + t.m + t.k) {
      throw RunError("parse error at row " + std::to_string(row) + ": expected " +
                     std::to_string(1 + t.m + t.k) + " columns, found " +
                     std::to_string(toks.size()));
    }
    t.ids.push_back(trim(toks[0]));
    for (std::int64_t j = 0; j < t.m + t.k; ++j) {
      const std::string tok = trim(toks[1 + j]);
      try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        (j < t.m ? t.y : t.x).push_back(v);
      } catch (const std::exception&) {
        throw RunError("parse error at row " + std::to_string(row) +
                       ": bad number '" + tok + "'");
      }
    }
    ++t.n;
  }
  if (t.n == 0) throw RunError("data file has no rows: " + path);
  return t;
}

// ---- config file (JSON object or key = value lines) ----------------------

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RunError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const std::exception&) {
    // key = value lines; '#' comments; comma-separated lists become arrays.
    json cfg = json::object();
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) throw RunError("bad config line: " + line);
      const std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (!value.empty() && value.front() == '[' && value.back() == ']') {
        value = value.substr(1, value.size() - 2);
      }
      if (value.find(',') != std::string::npos) {
        json arr = json::array();
        for (const auto& item : split(value, ',')) arr.push_back(std::stod(trim(item)));
        cfg[key] = arr;
      } else {
        try {
          std::size_t pos = 0;
          const double v = std::stod(value, &pos);
          if (pos == value.size()) {
            cfg[key] = v;
            continue;
          }
        } catch (const std::exception&) {
        }
        if (!value.empty() && value.front() == '"' && value.back() == '"') {
          value = value.substr(1, value.size() - 2);
        }
        cfg[key] = value;
      }
    }
    return cfg;
  }
}

struct ConfigHandle {
  bcpg_config* ptr = bcpg_config_create();
  ~ConfigHandle() { bcpg_config_destroy(ptr); }
};

// Effective settings, both applied to the handle and echoed in the manifest.
json apply_config(const json& file_cfg, bcpg_config* cfg) {
  json echo;
  echo["alpha"] = 0.1;
  echo["d"] = 10.0;
  echo["p0"] = 0.2;
  echo["w_limits"] = json::array({0.2});
  echo["M"] = 2000;
  echo["burn_in"] = 1000;
  echo["burn_in_fpp"] = 100;
  echo["pseudo_app_fraction"] = 1.0;
  for (const auto& [key, value] : file_cfg.items()) {
    if (key == "alpha") {
      check(bcpg_config_set_alpha(cfg, value.get<double>()));
      echo["alpha"] = value;
    } else if (key == "d") {
      check(bcpg_config_set_d(cfg, value.get<double>()));
      echo["d"] = value;
    } else if (key == "p0") {
      check(bcpg_config_set_p0(cfg, value.get<double>()));
      echo["p0"] = value;
    } else if (key == "w_limits") {
      std::vector<double> limits;
      if (value.is_array()) {
        limits = value.get<std::vector<double>>();
      } else {
        limits.push_back(value.get<double>());
      }
      check(bcpg_config_set_w_limits(cfg, limits.data(),
                                     static_cast<int64_t>(limits.size())));
      echo["w_limits"] = limits;
    } else if (key == "M" || key == "steps") {
      check(bcpg_config_set_steps(cfg, value.get<int64_t>()));
      echo["M"] = value;
    } else if (key == "burn_in" || key == "discard") {
      check(bcpg_config_set_discard(cfg, value.get<int64_t>()));
      echo["burn_in"] = value;
    } else if (key == "burn_in_fpp") {
      check(bcpg_config_set_burn_in_fpp(cfg, value.get<int64_t>()));
      echo["burn_in_fpp"] = value;
    } else if (key == "pseudo_app_fraction") {
      check(bcpg_config_set_pseudo_app_fraction(cfg, value.get<double>()));
      echo["pseudo_app_fraction"] = value;
    } else if (key == "seed" || key == "mode") {
      echo[key] = value;  // consumed by the command layer
    } else {
      throw UsageError("unknown config key: " + key);
    }
  }
  return echo;
}

// ---- SVG plots ------------------------------------------------------------

std::string svg_header(int width, int height) {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& color) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << xs[i] << ',' << ys[i] << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

// Series data + posterior means on top, a probability trace below.
void svg_series_plot(const std::string& path, const std::vector<double>& y,
                     const std::vector<double>& mean,
                     const std::vector<double>& prob, const std::string& prob_label) {
  const int width = 900, height = 420, pad = 40;
  const int panel = (height - 3 * pad) / 2;
  const std::int64_t n = static_cast<std::int64_t>(y.size());
  double lo = y[0], hi = y[0];
  for (double v : y) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : mean) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;
  auto sx = [&](std::int64_t i) {
    return pad + (width - 2.0 * pad) * i / std::max<std::int64_t>(1, n - 1);
  };
  auto sy_top = [&](double v) { return pad + panel * (1.0 - (v - lo) / (hi - lo)); };
  auto sy_bot = [&](double p) { return 2.0 * pad + panel + panel * (1.0 - p); };

  std::ostringstream out;
  out << svg_header(width, height);
  for (std::int64_t i = 0; i < n; ++i) {
    out << "<circle cx=\"" << sx(i) << "\" cy=\"" << sy_top(y[i])
        << "\" r=\"1.5\" fill=\"#888\"/>\n";
  }
  std::vector<double> xs(n), ms(n), ps(n);
  for (std::int64_t i = 0; i < n; ++i) {
    xs[i] = sx(i);
    ms[i] = sy_top(mean[i]);
    ps[i] = sy_bot(std::isnan(prob[i]) ? 0.0 : prob[i]);
  }
  out << polyline(xs, ms, "#c0392b");
  out << polyline(xs, ps, "#2e6da4");
  out << "<text x=\"" << pad << "\" y=\"" << pad - 10
      << "\" font-size=\"12\">data and posterior means</text>\n";
  out << "<text x=\"" << pad << "\" y=\"" << 2 * pad + panel - 10
      << "\" font-size=\"12\">" << prob_label << "</text>\n";
  out << "</svg>\n";
  write_file_atomic(path, out.str());
}

// Two heatmaps: posterior means and boundary probabilities.
void svg_grid_plot(const std::string& path, std::int64_t rows, std::int64_t cols,
                   const std::vector<double>& mean, const std::vector<double>& prob) {
  const int cell = 14, pad = 30, gap = 50;
  const int width = static_cast<int>(2 * pad + 2 * cols * cell + gap);
  const int height = static_cast<int>(2 * pad + rows * cell);
  double lo = mean[0], hi = mean[0];
  for (double v : mean) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi <= lo) hi = lo + 1.0;
  std::ostringstream out;
  out << svg_header(width, height);
  auto shade = [](double t) {
    const int g = static_cast<int>(255.0 * (1.0 - t));
    std::ostringstream c;
    c << "rgb(" << g << ',' << g << ",255)";
    return c.str();
  };
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      const double t1 = (mean[r * cols + c] - lo) / (hi - lo);
      out << "<rect x=\"" << pad + c * cell << "\" y=\"" << pad + r * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << shade(t1) << "\"/>\n";
      const double t2 = prob[r * cols + c];
      out << "<rect x=\"" << pad + cols * cell + gap + c * cell << "\" y=\""
          << pad + r * cell << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << shade(t2) << "\"/>\n";
    }
  }
  out << "<text x=\"" << pad << "\" y=\"" << pad - 8
      << "\" font-size=\"12\">posterior mean</text>\n";
  out << "<text x=\"" << pad + cols * cell + gap << "\" y=\"" << pad - 8
      << "\" font-size=\"12\">boundary probability</text>\n";
  out << "</svg>\n";
  write_file_atomic(path, out.str());
}

void svg_mse_plot(const std::string& path, const std::vector<double>& alphas,
                  const std::vector<std::string>& methods,
                  const std::vector<std::vector<double>>& mse) {
  const int width = 520, height = 360, pad = 50;
  double hi = 0.0;
  for (const auto& series : mse) {
    for (double v : series) hi = std::max(hi, v);
  }
  if (hi <= 0.0) hi = 1.0;
  double a_lo = alphas.front(), a_hi = alphas.back();
  if (a_hi <= a_lo) a_hi = a_lo + 1.0;
  auto sx = [&](double a) { return pad + (width - 2.0 * pad) * (a - a_lo) / (a_hi - a_lo); };
  auto sy = [&](double v) { return height - pad - (height - 2.0 * pad) * v / hi; };
  const char* colors[] = {"#c0392b", "#2e6da4", "#27ae60"};
  std::ostringstream out;
  out << svg_header(width, height);
  out << "<line x1=\"" << pad << "\" y1=\"" << height - pad << "\" x2=\""
      << width - pad << "\" y2=\"" << height - pad << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad
      << "\" y2=\"" << height - pad << "\" stroke=\"black\"/>\n";
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::vector<double> xs, ys;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      xs.push_back(sx(alphas[ai]));
      ys.push_back(sy(mse[mi][ai]));
    }
    out << polyline(xs, ys, colors[mi % 3]);
    out << "<text x=\"" << width - pad - 120 << "\" y=\"" << pad + 16 * mi
        << "\" font-size=\"12\" fill=\"" << colors[mi % 3] << "\">" << methods[mi]
        << "</text>\n";
  }
  out << "<text x=\"" << width / 2 - 30 << "\" y=\"" << height - 12
      << "\" font-size=\"12\">alpha</text>\n";
  out << "<text x=\"8\" y=\"" << height / 2 << "\" font-size=\"12\">MSE</text>\n";
  out << "</svg>\n";
  write_file_atomic(path, out.str());
}

// ---- manifest --------------------------------------------------------------

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& argv, const json& config_echo,
                    uint64_t seed, double wall_s, const json& warnings,
                    const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = config_echo;
  m["seed"] = seed;
  m["version"] = bcpg_version();
  m["wall_time_s"] = wall_s;
  m["warnings"] = warnings;
  m["outputs"] = outputs;
  m["created_utc"] = iso_now();
  write_file_atomic(path, m.dump(2) + "\n");
}

std::string default_outdir() {
  const char* env = std::getenv("BCPGRAPH_OUTDIR");
  return env && *env ? env : ".";
}

// ---- graph construction for fit ---------------------------------------------

struct GraphHandle {
  bcpg_graph* ptr = nullptr;
  ~GraphHandle() { bcpg_graph_destroy(ptr); }
};

void parse_grid_spec(const std::string& spec, int64_t* rows, int64_t* cols,
                     int* neighborhood) {
  const std::size_t x = spec.find('x');
  if (x == std::string::npos) throw UsageError("grid spec must look like RxC or RxC:8");
  const std::size_t colon = spec.find(':');
  try {
    *rows = std::stoll(spec.substr(0, x));
    *cols = std::stoll(
        spec.substr(x + 1, colon == std::string::npos ? std::string::npos : colon - x - 1));
    *neighborhood = 4;
    if (colon != std::string::npos) {
      const int nb = std::stoi(spec.substr(colon + 1));
      if (nb != 4 && nb != 8) throw UsageError("grid neighborhood must be 4 or 8");
      *neighborhood = nb;
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("bad grid spec: " + spec);
  }
}

// ---- subcommands ------------------------------------------------------------

struct FitArgs {
  std::string mode, data_file, graph_file, grid_spec, coords_file, config_file;
  std::string out_dir;
  uint64_t seed = 1;
  bool seed_given = false;
  bool plot = false;
};

int run_fit(const FitArgs& args, const std::vector<std::string>& argv_echo) {
  const auto t0 = std::chrono::steady_clock::now();
  json file_cfg = args.config_file.empty() ? json::object()
                                           : read_config_file(args.config_file);
  std::string mode = args.mode;
  if (mode.empty() && file_cfg.contains("mode")) {
    mode = file_cfg["mode"].get<std::string>();
  }
  if (mode != "path" && mode != "multivariate" && mode != "graph") {
    throw UsageError("mode must be path, multivariate or graph");
  }
  uint64_t seed = args.seed;
  if (!args.seed_given && file_cfg.contains("seed")) {
    seed = static_cast<uint64_t>(file_cfg["seed"].get<double>());
  }

  const DataTable data = read_data_csv(args.data_file);
  const int graph_flags = (!args.graph_file.empty()) + (!args.grid_spec.empty()) +
                          (!args.coords_file.empty());
  if (mode != "graph" && graph_flags > 0) {
    throw UsageError(mode + " mode runs on the implicit path graph; remove "
                            "--graph/--grid/--mst-coords");
  }
  if (mode == "path" && (data.m != 1 || data.k != 0)) {
    throw UsageError("path mode expects a single y column and no predictors");
  }
  if (mode == "multivariate" && data.k != 0) {
    throw UsageError("multivariate mode expects response columns only");
  }
  if (mode == "graph" && data.m != 1) {
    throw UsageError("graph mode expects one response column (y2.. require "
                     "--mode multivariate)");
  }

  ConfigHandle cfg;
  const json config_echo = apply_config(file_cfg, cfg.ptr);

  GraphHandle graph;
  std::string graph_desc = "path";
  if (mode == "graph") {
    if (graph_flags != 1) {
      throw UsageError("graph mode needs exactly one of --graph, --grid, "
                       "--mst-coords");
    }
    if (!args.graph_file.empty()) {
      check_data(bcpg_graph_load_edge_csv(args.graph_file.c_str(), &graph.ptr));
      graph_desc = "edges:" + args.graph_file;
    } else if (!args.grid_spec.empty()) {
      int64_t rows = 0, cols = 0;
      int nb = 4;
      parse_grid_spec(args.grid_spec, &rows, &cols, &nb);
      check(bcpg_graph_create_grid(rows, cols, nb, &graph.ptr));
      graph_desc = "grid:" + args.grid_spec;
    } else {
      check_data(bcpg_graph_load_coords_csv(args.coords_file.c_str(), &graph.ptr));
      graph_desc = "mst:" + args.coords_file;
    }
    if (bcpg_graph_node_count(graph.ptr) != data.n) {
      throw RunError("graph has " + std::to_string(bcpg_graph_node_count(graph.ptr)) +
                     " nodes but the data file has " + std::to_string(data.n) +
                     " rows");
    }
  }

  bcpg_result* result = nullptr;
  if (mode == "path") {
    check_data(bcpg_fit_path(data.y.data(), data.n, cfg.ptr, seed, &result));
  } else if (mode == "multivariate") {
    check_data(bcpg_fit_multivariate(data.y.data(), data.n, data.m, cfg.ptr, seed,
                                &result));
  } else {
    check_data(bcpg_fit_graph(graph.ptr, data.y.data(),
                              data.k > 0 ? data.x.data() : nullptr, data.k,
                              cfg.ptr, seed, &result));
  }
  std::unique_ptr<bcpg_result, decltype(&bcpg_result_destroy)> result_guard(
      result, &bcpg_result_destroy);

  fs::create_directories(args.out_dir);
  const std::string posterior_path = args.out_dir + "/posterior.csv";
  const std::string manifest_path = args.out_dir + "/manifest.json";
  check_data(bcpg_result_write_posterior_csv(result, posterior_path.c_str()));
  std::vector<std::string> outputs{posterior_path};

  if (args.plot) {
    const std::string plot_path = args.out_dir + "/plot.svg";
    const std::int64_t n = bcpg_result_node_count(result);
    const std::int64_t m = bcpg_result_dim_count(result);
    std::vector<double> mean(n * m), prob(n);
    check(bcpg_result_posterior_mean(result, mean.data()));
    if (mode == "graph") {
      check(bcpg_result_node_boundary_prob(result, prob.data()));
      // Grid layout when the spec names one; otherwise a series plot.
      if (!args.grid_spec.empty()) {
        int64_t rows = 0, cols = 0;
        int nb = 4;
        parse_grid_spec(args.grid_spec, &rows, &cols, &nb);
        svg_grid_plot(plot_path, rows, cols, mean, prob);
      } else {
        svg_series_plot(plot_path, data.y, mean, prob, "boundary probability");
      }
    } else {
      check(bcpg_result_cp_prob(result, prob.data()));
      std::vector<double> first_dim(n);
      for (std::int64_t i = 0; i < n; ++i) first_dim[i] = mean[i * m];
      std::vector<double> y_first(n);
      for (std::int64_t i = 0; i < n; ++i) y_first[i] = data.y[i * m];
      svg_series_plot(plot_path, y_first, first_dim, prob,
                      "change point probability");
    }
    outputs.push_back(plot_path);
  }

  json warnings;
  warnings["wtilde_clamps"] = bcpg_result_wtilde_clamp_count(result);
  warnings["jitter_events"] = bcpg_result_jitter_count(result);
  json echo = config_echo;
  echo["mode"] = mode;
  echo["graph"] = graph_desc;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(manifest_path, "fit", argv_echo, echo, seed, wall, warnings,
                 outputs);

  std::cout << "fit complete: " << data.n << " nodes, mean blocks "
            << bcpg_result_mean_blocks(result) << ", chain time "
            << bcpg_result_runtime_seconds(result) << " s\n"
            << "wrote " << posterior_path << " and " << manifest_path << "\n";
  return 0;
}

struct SimulateArgs {
  std::string scene_file, archetype, out_file, scene_out;
  int64_t rows = 20, cols = 20;
  double sigma = 1.0;
  uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& args, const std::vector<std::string>& argv_echo) {
  const auto t0 = std::chrono::steady_clock::now();
  if (args.scene_file.empty() == args.archetype.empty()) {
    throw UsageError("give exactly one of --scene or --archetype");
  }
  if (!(args.sigma > 0.0)) throw UsageError("sigma must be > 0");
  if (args.out_file.empty()) throw UsageError("--out is required");

  bcpg_scene* scene = nullptr;
  if (!args.archetype.empty()) {
    check(bcpg_scene_create_archetype(args.archetype.c_str(), args.rows, args.cols,
                                      args.sigma, &scene));
  } else {
    check_data(bcpg_scene_load(args.scene_file.c_str(), &scene));
  }
  std::unique_ptr<bcpg_scene, decltype(&bcpg_scene_destroy)> guard(
      scene, &bcpg_scene_destroy);

  const int64_t n = bcpg_scene_node_count(scene);
  std::vector<double> y(n), truth(n);
  check_data(bcpg_scene_simulate(scene, args.seed, y.data(), truth.data()));

  std::ostringstream data_csv, truth_csv;
  data_csv.precision(12);
  truth_csv.precision(12);
  data_csv << "id,y\n";
  truth_csv << "id,theta\n";
  for (int64_t i = 0; i < n; ++i) {
    data_csv << i << ',' << y[i] << '\n';
    truth_csv << i << ',' << truth[i] << '\n';
  }
  write_file_atomic(args.out_file, data_csv.str());
  const std::string stem = args.out_file.substr(0, args.out_file.rfind('.'));
  const std::string truth_path = stem + ".truth.csv";
  write_file_atomic(truth_path, truth_csv.str());
  std::vector<std::string> outputs{args.out_file, truth_path};
  if (!args.scene_out.empty()) {
    check_data(bcpg_scene_save(scene, args.scene_out.c_str()));
    outputs.push_back(args.scene_out);
  }

  json echo;
  echo["scene"] = args.archetype.empty() ? args.scene_file : args.archetype;
  echo["rows"] = args.rows;
  echo["cols"] = args.cols;
  echo["sigma"] = args.sigma;
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(stem + ".manifest.json", "simulate", argv_echo, echo, args.seed,
                 wall, json::object(), outputs);
  std::cout << "wrote " << args.out_file << " (" << n << " rows) and "
            << truth_path << "\n";
  return 0;
}

struct SweepArgs {
  std::string scenes_dir, archetypes, alphas, methods, config_file, out_file;
  int replicates = 10;
  uint64_t seed = 1;
  int threads = 0;
  int64_t rows = 20, cols = 20;
  double sigma = 1.0;
  bool plot = false;
};

int run_sweep(const SweepArgs& args, const std::vector<std::string>& argv_echo) {
  const auto t0 = std::chrono::steady_clock::now();
  if (args.out_file.empty()) throw UsageError("--out is required");

  std::vector<bcpg_scene*> scenes;
  auto cleanup = [&scenes]() {
    for (auto* s : scenes) bcpg_scene_destroy(s);
  };
  try {
    if (!args.scenes_dir.empty()) {
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(args.scenes_dir)) {
        if (entry.path().extension() == ".csv" &&
            entry.path().string().find(".truth.") == std::string::npos) {
          files.push_back(entry.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        bcpg_scene* s = nullptr;
        check_data(bcpg_scene_load(file.c_str(), &s));
        scenes.push_back(s);
      }
    }
    for (const auto& name : split(args.archetypes, ',')) {
      if (trim(name).empty()) continue;
      bcpg_scene* s = nullptr;
      check(bcpg_scene_create_archetype(trim(name).c_str(), args.rows, args.cols,
                                        args.sigma, &s));
      scenes.push_back(s);
    }
    if (scenes.empty()) {
      throw UsageError("no scenes found (use --scenes DIR and/or --archetypes)");
    }

    std::vector<double> alphas;
    for (const auto& tok : split(args.alphas, ',')) {
      if (!trim(tok).empty()) alphas.push_back(std::stod(trim(tok)));
    }
    if (alphas.empty()) throw UsageError("--alphas is required");
    std::vector<int> methods;
    std::vector<std::string> method_names;
    for (const auto& tok : split(args.methods, ',')) {
      const std::string name = trim(tok);
      if (name.empty()) continue;
      if (name == "BCP-Graph-0") {
        methods.push_back(0);
      } else if (name == "BCP-Graph-1") {
        methods.push_back(1);
      } else {
        throw UsageError("unknown method: " + name);
      }
      method_names.push_back(name);
    }
    if (methods.empty()) throw UsageError("--methods is required");
    if (args.replicates < 1) throw UsageError("--replicates must be >= 1");

    ConfigHandle cfg;
    const json file_cfg = args.config_file.empty() ? json::object()
                                                   : read_config_file(args.config_file);
    json config_echo = apply_config(file_cfg, cfg.ptr);

    int64_t failures = 0;
    check(bcpg_sweep_run(scenes.data(), static_cast<int64_t>(scenes.size()),
                         alphas.data(), static_cast<int64_t>(alphas.size()),
                         methods.data(), static_cast<int64_t>(methods.size()),
                         args.replicates, cfg.ptr, args.seed,
                         args.out_file.c_str(), args.threads, &failures));

    std::vector<std::string> outputs{args.out_file};
    if (args.plot) {
      // Aggregate the results file into per-scene mean MSE curves.
      std::ifstream in(args.out_file);
      std::string line;
      std::getline(in, line);  // header
      struct Key {
        std::string scene, method;
        double alpha;
      };
      std::vector<std::string> scene_names;
      std::map<std::string, std::map<std::string, std::map<double, std::pair<double, int>>>> agg;
      while (std::getline(in, line)) {
        const auto toks = split(line, ',');
        if (toks.size() < 7) continue;
        const std::string scene = toks[0], method = toks[1];
        const double alpha = std::stod(toks[2]);
        const double mse = std::stod(toks[4]);
        auto& cell = agg[scene][method][alpha];
        cell.first += mse;
        cell.second += 1;
        if (std::find(scene_names.begin(), scene_names.end(), scene) ==
            scene_names.end()) {
          scene_names.push_back(scene);
        }
      }
      const std::string stem = args.out_file.substr(0, args.out_file.rfind('.'));
      for (const auto& scene : scene_names) {
        std::vector<std::vector<double>> curves;
        for (const auto& method : method_names) {
          std::vector<double> curve;
          for (double a : alphas) {
            const auto& cell = agg[scene][method][a];
            curve.push_back(cell.second ? cell.first / cell.second : 0.0);
          }
          curves.push_back(curve);
        }
        std::string safe = scene;
        std::replace(safe.begin(), safe.end(), '/', '_');
        const std::string plot_path = stem + "_" + safe + ".svg";
        svg_mse_plot(plot_path, alphas, method_names, curves);
        outputs.push_back(plot_path);
      }
    }

    json warnings;
    warnings["failed_cells"] = failures;
    config_echo["alphas"] = alphas;
    config_echo["methods"] = method_names;
    config_echo["replicates"] = args.replicates;
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string stem = args.out_file.substr(0, args.out_file.rfind('.'));
    write_manifest(stem + ".manifest.json", "sweep", argv_echo, config_echo,
                   args.seed, wall, warnings, outputs);
    std::cout << "sweep complete: " << args.out_file << " (" << failures
              << " failed cells)\n";
    cleanup();
    return 0;
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian change point analysis of linear models on graphs"};
  app.require_subcommand(1);
  std::vector<std::string> argv_echo(argv, argv + argc);

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a change point model");
  fit_cmd->add_option("--mode", fit.mode, "path | multivariate | graph");
  fit_cmd->add_option("--data", fit.data_file, "data CSV: id,y[,y2..ym][,x1..xk]")
      ->required();
  fit_cmd->add_option("--graph", fit.graph_file, "edge list CSV (from,to)");
  fit_cmd->add_option("--grid", fit.grid_spec, "grid spec RxC or RxC:8");
  fit_cmd->add_option("--mst-coords", fit.coords_file,
                      "coordinate CSV (id,x,y); builds the Euclidean MST");
  fit_cmd->add_option("--config", fit.config_file, "config file (JSON or key=value)");
  fit_cmd->add_option("--seed", fit.seed, "RNG seed")
      ->capture_default_str()
      ->trigger_on_parse()
      ->each([&fit](const std::string&) { fit.seed_given = true; });
  fit_cmd->add_option("--out", fit.out_dir, "output directory");
  fit_cmd->add_flag("--plot", fit.plot, "write plot.svg");

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "simulate a grid scene");
  sim_cmd->add_option("--scene", sim.scene_file, "scene CSV (+ .json sidecar)");
  sim_cmd->add_option("--archetype", sim.archetype,
                      "half-split | quadrants | island | stripes | checkerboard "
                      "| nested-square");
  sim_cmd->add_option("--rows", sim.rows, "grid rows")->capture_default_str();
  sim_cmd->add_option("--cols", sim.cols, "grid cols")->capture_default_str();
  sim_cmd->add_option("--sigma", sim.sigma, "noise SD (> 0)")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  sim_cmd->add_option("--out", sim.out_file, "output data CSV")->required();
  sim_cmd->add_option("--scene-out", sim.scene_out,
                      "also write the scene definition CSV (+ sidecar)");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "factorial simulation study");
  sweep_cmd->add_option("--scenes", sweep.scenes_dir, "directory of scene CSVs");
  sweep_cmd->add_option("--archetypes", sweep.archetypes,
                        "comma list of built-in archetypes");
  sweep_cmd->add_option("--rows", sweep.rows, "grid rows for archetypes")
      ->capture_default_str();
  sweep_cmd->add_option("--cols", sweep.cols, "grid cols for archetypes")
      ->capture_default_str();
  sweep_cmd->add_option("--sigma", sweep.sigma, "noise SD for archetypes")
      ->capture_default_str();
  sweep_cmd->add_option("--alphas", sweep.alphas, "comma list, e.g. 0.05,0.1,0.3")
      ->required();
  sweep_cmd->add_option("--methods", sweep.methods,
                        "comma list of BCP-Graph-0,BCP-Graph-1")
      ->required();
  sweep_cmd->add_option("--replicates", sweep.replicates, "datasets per scene")
      ->capture_default_str();
  sweep_cmd->add_option("--config", sweep.config_file, "config file");
  sweep_cmd->add_option("--seed", sweep.seed, "base seed")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep.threads, "worker threads (0 = auto)")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out_file, "results CSV")->required();
  sweep_cmd->add_flag("--plot", sweep.plot, "MSE-vs-alpha SVG per scene");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      if (fit.out_dir.empty()) fit.out_dir = default_outdir();
      return run_fit(fit, argv_echo);
    }
    if (sim_cmd->parsed()) return run_simulate(sim, argv_echo);
    return run_sweep(sweep, argv_echo);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
