/*
 * Copyright 2026 the elmpc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end.  Talks to the library exclusively through the
// public C interface; everything here is argument plumbing and report
// formatting.
//
// Exit codes: 0 success, 2 configuration problem, 3 unreadable or
// malformed data file, 4 numerical failure, 1 anything else.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "elmpc.h"

#include "config.hpp"

namespace {

using cli::ConfigError;
using cli::RunConfig;

struct ApiError : std::runtime_error {
  elmpc_status status;
  ApiError(elmpc_status s, const std::string& what)
      : std::runtime_error(what), status(s) {}
};

void check(elmpc_status s, const std::string& what) {
  if (s == ELMPC_OK) return;
  throw ApiError(s, what + ": " + elmpc_status_str(s) + " (" +
                        elmpc_last_error() + ")");
}

int exit_code_for(elmpc_status s) {
  switch (s) {
  case ELMPC_ERR_NULL:
  case ELMPC_ERR_INVALID_ARG:
  case ELMPC_ERR_DIMENSION:
    return 2;
  case ELMPC_ERR_IO:
  case ELMPC_ERR_PARSE:
    return 3;
  case ELMPC_ERR_SINGULAR:
  case ELMPC_ERR_UNTRAINED:
  case ELMPC_ERR_NUMERIC:
  case ELMPC_ERR_DIVERGED:
  case ELMPC_ERR_INFEASIBLE:
    return 4;
  default:
    return 1;
  }
}

struct ModelDeleter {
  void operator()(elmpc_model* m) const { elmpc_model_destroy(m); }
};
struct ControllerDeleter {
  void operator()(elmpc_controller* c) const { elmpc_mpc_destroy(c); }
};
struct PlantDeleter {
  void operator()(elmpc_plant* p) const { elmpc_plant_destroy(p); }
};
struct BufferDeleter {
  void operator()(double* p) const { elmpc_free(p); }
};

using ModelPtr = std::unique_ptr<elmpc_model, ModelDeleter>;
using ControllerPtr = std::unique_ptr<elmpc_controller, ControllerDeleter>;
using PlantPtr = std::unique_ptr<elmpc_plant, PlantDeleter>;
using BufferPtr = std::unique_ptr<double, BufferDeleter>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<double> data;
  int rows = 0, cols = 0;
  double at(int r, int c) const { return data[size_t(r) * cols + c]; }
  const double* row(int r) const { return data.data() + size_t(r) * cols; }
};

Table read_table(const std::string& path) {
  double* raw = nullptr;
  int rows = 0, cols = 0;
  check(elmpc_csv_read(path.c_str(), &raw, &rows, &cols),
        "reading " + path);
  BufferPtr guard(raw);
  Table t;
  t.rows = rows;
  t.cols = cols;
  t.data.assign(raw, raw + size_t(rows) * cols);
  return t;
}

void write_table(const std::string& path, const std::vector<double>& data,
                 int rows, int cols,
                 const std::vector<std::string>& col_names,
                 const std::vector<std::string>& comments) {
  std::vector<const char*> names, lines;
  for (const auto& s : col_names) names.push_back(s.c_str());
  for (const auto& s : comments) lines.push_back(s.c_str());
  check(elmpc_csv_write(path.c_str(), data.data(), rows, cols,
                        names.data(), lines.empty() ? nullptr : lines.data(),
                        static_cast<int>(lines.size())),
        "writing " + path);
}

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

RunConfig load_config(const Common& c, const std::string& schema) {
  RunConfig cfg;
  if (!c.config_path.empty()) cfg = RunConfig::parse_file(c.config_path);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  if (c.seed.has_value())
    cfg.apply_override("seed=" + std::to_string(*c.seed));
  cfg.require_schema(schema);
  return cfg;
}

std::string out_path(const Common& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / name).string();
}

std::vector<std::string> provenance(const RunConfig& cfg,
                                    const std::string& command) {
  return {std::string("elmpc ") + elmpc_version(), "command: " + command,
          "config: " + cfg.hash()};
}

elmpc_noise_spec noise_from_config(const RunConfig& cfg,
                                   std::vector<int>& channels,
                                   std::vector<double>& variances) {
  elmpc_noise_spec n{};
  n.enabled = cfg.get_bool("noise_enabled", true) ? 1 : 0;
  channels = cfg.get_ints("noise_channels", {0, 1});
  variances = cfg.get_doubles("noise_var", {0.0012, 1.76});
  if (channels.size() != variances.size())
    throw ConfigError("noise_channels and noise_var differ in length");
  n.channels = channels.data();
  n.variances = variances.data();
  n.n_channels = static_cast<int>(channels.size());
  n.seed = cfg.get_u64("noise_seed", 101);
  return n;
}

std::vector<std::string> numbered(const std::string& stem, int count) {
  std::vector<std::string> out;
  for (int i = 1; i <= count; ++i)
    out.push_back(stem + "_" + std::to_string(i));
  return out;
}

/* ------------------------------------------------------------------ */

int run_gen_data(const Common& c) {
  RunConfig cfg = load_config(c, "elmpc-gen-data-1");
  const int length = static_cast<int>(cfg.get_int("length", 25400));
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const int hold_min = static_cast<int>(cfg.get_int("hold_min", 5));
  const int hold_max = static_cast<int>(cfg.get_int("hold_max", 30));
  std::vector<double> u_lo =
      cfg.get_doubles("u_lo", {19.0, -121.0, 272.0});
  std::vector<double> u_hi =
      cfg.get_doubles("u_hi", {25.0, -100.0, 375.0});
  std::vector<int> noise_ch;
  std::vector<double> noise_var;
  elmpc_noise_spec noise = noise_from_config(cfg, noise_ch, noise_var);
  cfg.finish();

  elmpc_plant* raw = nullptr;
  check(elmpc_plant_create_builtin(&raw), "creating the benchmark plant");
  PlantPtr plant(raw);
  int n = 0, m = 0;
  check(elmpc_plant_dims(plant.get(), &n, &m), "querying plant dims");
  if (static_cast<int>(u_lo.size()) != m ||
      static_cast<int>(u_hi.size()) != m)
    throw ConfigError("u_lo/u_hi must have " + std::to_string(m) +
                      " entries");

  std::vector<double> u(size_t(length) * m);
  check(elmpc_aprbs_generate(m, u_lo.data(), u_hi.data(), hold_min,
                             hold_max, length, seed, u.data()),
        "generating the excitation");

  std::vector<double> z0(n);
  check(elmpc_plant_steady_state(plant.get(), u.data(), z0.data()),
        "settling the plant");

  std::vector<double> y(size_t(length) * n);
  check(elmpc_plant_rollout(plant.get(), z0.data(), u.data(), length,
                            &noise, y.data()),
        "rolling out the plant");

  std::vector<std::string> comments = provenance(cfg, "gen-data");
  comments.push_back("seed: " + std::to_string(seed));
  write_table(out_path(c, "u.csv"), u, length, m, numbered("u", m),
              comments);
  write_table(out_path(c, "y.csv"), y, length, n, numbered("y", n),
              comments);
  std::cout << "wrote " << out_path(c, "u.csv") << " and "
            << out_path(c, "y.csv") << " (" << length << " cycles, "
            << m << " inputs, " << n << " outputs)\n";
  return 0;
}

/* ------------------------------------------------------------------ */

// One-step-ahead RMSE of `model` on the [offset, offset+count) slice of a
// sequence pair, in normalized output units.
double osap_on_slice(const elmpc_model* model, const Table& u,
                     const Table& y, int offset, int count, int order) {
  int rows = 0, feats = 0;
  check(elmpc_narx_dims(count, u.cols, y.cols, order, order, &rows, &feats),
        "framing the evaluation slice");
  std::vector<double> X(size_t(rows) * feats), Y(size_t(rows) * y.cols);
  check(elmpc_narx_frame(u.row(offset), y.row(offset), count, u.cols,
                         y.cols, order, order, X.data(), Y.data()),
        "framing the evaluation slice");
  double rmse = 0.0;
  check(elmpc_eval_osap(model, X.data(), Y.data(), rows, &rmse),
        "one-step evaluation");
  return rmse;
}

double msap_on_slice(const elmpc_model* model, const Table& u,
                     const Table& y, int offset, int count, int order,
                     int horizon) {
  double rmse = 0.0;
  check(elmpc_eval_rollout(model, u.row(offset), y.row(offset), count,
                           u.cols, y.cols, order, order, horizon, &rmse),
        "free-running evaluation");
  return rmse;
}

int run_train(const Common& c) {
  RunConfig cfg = load_config(c, "elmpc-train-1");
  const std::string u_csv = cfg.get_string("u_csv", "u.csv");
  const std::string y_csv = cfg.get_string("y_csv", "y.csv");
  const int n_train = static_cast<int>(cfg.get_int("n_train", 16000));
  const int n_test = static_cast<int>(cfg.get_int("n_test", 7000));
  const int n_msap = static_cast<int>(cfg.get_int("n_msap", 2400));
  const double cv_split = cfg.get_double("cv_split", 0.7);
  const bool search = cfg.get_bool("search", true);
  std::vector<int> nh_grid = cfg.get_ints("nh_grid", {10, 20, 40, 80});
  std::vector<double> lambda_grid =
      cfg.get_doubles("lambda_grid", {0.0001, 0.001, 0.01, 0.1});
  std::vector<int> order_grid = cfg.get_ints("order_grid", {1, 2});
  const bool has_nh = cfg.has("n_hidden");
  const bool has_lambda = cfg.has("lambda");
  const bool has_order = cfg.has("order");
  int n_hidden = static_cast<int>(cfg.get_int("n_hidden", 20));
  double lambda = cfg.get_double("lambda", 0.001);
  int order = static_cast<int>(cfg.get_int("order", 1));
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const int msap_horizon =
      static_cast<int>(cfg.get_int("msap_horizon", 600));
  cfg.finish();

  Table u = read_table(u_csv);
  Table y = read_table(y_csv);
  if (u.rows != y.rows)
    throw ConfigError("input/output sequences differ in length");
  if (n_train <= 0 || n_test <= 0 || n_msap <= 0)
    throw ConfigError("split sizes must be positive");
  if (n_train + n_test + n_msap > u.rows)
    throw ConfigError("splits need " +
                      std::to_string(n_train + n_test + n_msap) +
                      " cycles, data has " + std::to_string(u.rows));
  if (!(cv_split > 0.0 && cv_split < 1.0))
    throw ConfigError("cv_split must lie in (0, 1)");

  double best_cv_rmse = NAN;
  if (search) {
    // An empty grid axis falls back to the fixed value for that
    // hyper-parameter; with neither set there is nothing to score.
    if (nh_grid.empty()) {
      if (!has_nh)
        throw ConfigError("nh_grid is empty and n_hidden is not set");
      nh_grid = {n_hidden};
    }
    if (lambda_grid.empty()) {
      if (!has_lambda)
        throw ConfigError("lambda_grid is empty and lambda is not set");
      lambda_grid = {lambda};
    }
    if (order_grid.empty()) {
      if (!has_order)
        throw ConfigError("order_grid is empty and order is not set");
      order_grid = {order};
    }
    const int n_cand = static_cast<int>(nh_grid.size()) *
                       static_cast<int>(lambda_grid.size()) *
                       static_cast<int>(order_grid.size());
    std::vector<double> table(size_t(n_cand) * 4);
    int best_index = 0, split_index = 0;
    check(elmpc_cross_validate(
              u.data.data(), y.data.data(), n_train, u.cols, y.cols,
              nh_grid.data(), static_cast<int>(nh_grid.size()),
              lambda_grid.data(), static_cast<int>(lambda_grid.size()),
              order_grid.data(), static_cast<int>(order_grid.size()),
              cv_split, seed, table.data(), &best_index, &split_index),
          "hyper-parameter search");
    n_hidden = static_cast<int>(table[size_t(best_index) * 4 + 0]);
    lambda = table[size_t(best_index) * 4 + 1];
    order = static_cast<int>(table[size_t(best_index) * 4 + 2]);
    best_cv_rmse = table[size_t(best_index) * 4 + 3];
    std::vector<std::string> comments = provenance(cfg, "train");
    comments.push_back("fit cycles: " + std::to_string(split_index) +
                       ", scored cycles: " +
                       std::to_string(n_train - split_index));
    write_table(out_path(c, "cv_table.csv"), table, n_cand, 4,
                {"n_hidden", "lambda", "order", "rmse"}, comments);
  }

  // The winner is refitted on the whole training split before scoring the
  // held-out ranges.
  elmpc_model* raw = nullptr;
  check(elmpc_narx_train(u.data.data(), y.data.data(), n_train, u.cols,
                         y.cols, order, order, n_hidden, lambda, seed,
                         &raw),
        "fitting the model");
  ModelPtr model(raw);

  int64_t params = 0;
  check(elmpc_model_param_count(model.get(), &params), "counting weights");

  const double test_osap =
      osap_on_slice(model.get(), u, y, n_train, n_test, order);
  const int msap_off = n_train + n_test;
  const int horizon = std::min(msap_horizon, n_msap - order);
  const double msap =
      msap_on_slice(model.get(), u, y, msap_off, n_msap, order, horizon);

  const std::string model_path = out_path(c, "model.txt");
  check(elmpc_model_save(model.get(), model_path.c_str()),
        "saving the model");

  std::ofstream rep(out_path(c, "train_report.txt"));
  for (const auto& line : provenance(cfg, "train")) rep << "# " << line
                                                        << "\n";
  rep << "n_hidden = " << n_hidden << "\n";
  rep << "lambda = " << num(lambda) << "\n";
  rep << "order = " << order << "\n";
  rep << "seed = " << seed << "\n";
  rep << "parameters = " << params << "\n";
  rep << "n_train = " << n_train << "\n";
  rep << "n_test = " << n_test << "\n";
  rep << "n_msap = " << n_msap << "\n";
  if (search) rep << "cv_rmse = " << num(best_cv_rmse) << "\n";
  rep << "test_osap_rmse = " << num(test_osap) << "\n";
  rep << "msap_rmse = " << num(msap) << "\n";
  rep << "msap_horizon = " << horizon << "\n";
  if (!rep.good()) throw std::runtime_error("writing train_report.txt");
  rep.close();

  std::cout << "model: " << model_path << " (n_hidden=" << n_hidden
            << ", lambda=" << num(lambda) << ", order=" << order
            << ", parameters=" << params << ")\n"
            << "test one-step rmse (normalized): " << num(test_osap) << "\n"
            << "free-run rmse (normalized, " << horizon
            << "-step blocks): " << num(msap) << "\n";
  return 0;
}

/* ------------------------------------------------------------------ */

int run_eval(const Common& c) {
  RunConfig cfg = load_config(c, "elmpc-eval-1");
  const std::string model_path = cfg.get_string("model");
  const std::string u_csv = cfg.get_string("u_csv", "u.csv");
  const std::string y_csv = cfg.get_string("y_csv", "y.csv");
  const int offset = static_cast<int>(cfg.get_int("offset", 0));
  int length = static_cast<int>(cfg.get_int("length", 0));
  const int order = static_cast<int>(cfg.get_int("order", 1));
  const int msap_horizon =
      static_cast<int>(cfg.get_int("msap_horizon", 600));
  cfg.finish();

  elmpc_model* raw = nullptr;
  check(elmpc_model_load(model_path.c_str(), &raw), "loading the model");
  ModelPtr model(raw);

  Table u = read_table(u_csv);
  Table y = read_table(y_csv);
  if (u.rows != y.rows)
    throw ConfigError("input/output sequences differ in length");
  if (offset < 0 || offset >= u.rows)
    throw ConfigError("offset outside the sequence");
  if (length <= 0) length = u.rows - offset;
  if (offset + length > u.rows)
    throw ConfigError("evaluation window extends past the sequence");

  int rows = 0, feats = 0;
  check(elmpc_narx_dims(length, u.cols, y.cols, order, order, &rows,
                        &feats),
        "framing the evaluation window");
  std::vector<double> X(size_t(rows) * feats), Y(size_t(rows) * y.cols);
  check(elmpc_narx_frame(u.row(offset), y.row(offset), length, u.cols,
                         y.cols, order, order, X.data(), Y.data()),
        "framing the evaluation window");
  double osap = 0.0;
  check(elmpc_eval_osap(model.get(), X.data(), Y.data(), rows, &osap),
        "one-step evaluation");
  const int horizon = std::min(msap_horizon, length - order);
  const double msap =
      msap_on_slice(model.get(), u, y, offset, length, order, horizon);

  // One-step predictions next to the measurements they target, for
  // plotting: cycle, y_1..y_n, yhat_1..yhat_n.
  std::vector<double> pred(size_t(rows) * (1 + 2 * y.cols));
  for (int k = 0; k < rows; ++k) {
    double* row = pred.data() + size_t(k) * (1 + 2 * y.cols);
    row[0] = offset + order + k;
    std::memcpy(row + 1, Y.data() + size_t(k) * y.cols,
                sizeof(double) * y.cols);
    check(elmpc_model_predict(model.get(), X.data() + size_t(k) * feats,
                              row + 1 + y.cols),
          "predicting the evaluation window");
  }
  std::vector<std::string> pred_cols;
  pred_cols.push_back("cycle");
  for (const auto& name : numbered("y", y.cols)) pred_cols.push_back(name);
  for (const auto& name : numbered("yhat", y.cols))
    pred_cols.push_back(name);
  write_table(out_path(c, "pred.csv"), pred, rows, 1 + 2 * y.cols,
              pred_cols, provenance(cfg, "eval"));

  std::ofstream rep(out_path(c, "eval_report.txt"));
  for (const auto& line : provenance(cfg, "eval")) rep << "# " << line
                                                       << "\n";
  rep << "cycles = " << length << "\n";
  rep << "offset = " << offset << "\n";
  rep << "osap_rmse = " << num(osap) << "\n";
  rep << "msap_rmse = " << num(msap) << "\n";
  rep << "msap_horizon = " << horizon << "\n";
  if (!rep.good()) throw std::runtime_error("writing eval_report.txt");
  rep.close();

  std::cout << "one-step rmse (normalized): " << num(osap) << "\n"
            << "free-run rmse (normalized, " << horizon
            << " steps): " << num(msap) << "\n";
  return 0;
}

/* ------------------------------------------------------------------ */

int run_simulate(const Common& c) {
  RunConfig cfg = load_config(c, "elmpc-sim-1");
  // Scenarios only choose defaults; every key can still be overridden.
  const std::string scenario = cfg.get_string("scenario", "custom");
  if (scenario != "custom" && scenario != "step" &&
      scenario != "step_rmax_constrained" && scenario != "sinusoid")
    throw ConfigError(
        "scenario must be one of custom, step, step_rmax_constrained, "
        "sinusoid; got '" + scenario + "'");
  const std::string model_path = cfg.get_string("model");
  const std::string plant_kind = cfg.get_string("plant", "builtin");
  const int cycles = static_cast<int>(cfg.get_int("cycles", 900));
  std::vector<int> tracked = cfg.get_ints("tracked", {0, 1});
  const int p = static_cast<int>(tracked.size());

  elmpc_model* raw_model = nullptr;
  check(elmpc_model_load(model_path.c_str(), &raw_model),
        "loading the model");
  ModelPtr model(raw_model);
  int d_in = 0, d_out = 0;
  check(elmpc_model_dims(model.get(), &d_in, &d_out, nullptr),
        "querying model dims");
  const int n = d_out, m = d_in - d_out;
  if (m < 1) throw ConfigError("model is not a lag-one transition map");

  elmpc_mpc_config mc;
  elmpc_mpc_config_init(&mc);
  mc.horizon_pred = static_cast<int>(cfg.get_int("horizon_pred", 3));
  mc.horizon_ctrl = static_cast<int>(cfg.get_int("horizon_ctrl", 3));
  mc.tracked = tracked.data();
  mc.n_tracked = p;
  std::vector<double> w_track = cfg.get_doubles("w_track", {500.0, 1.0});
  std::vector<double> w_move =
      cfg.get_doubles("w_move", {20.0, 1.0, 1.0});
  mc.w_track = w_track.data();
  mc.w_track_len = static_cast<int>(w_track.size());
  mc.w_move = w_move.data();
  mc.w_move_len = static_cast<int>(w_move.size());
  std::vector<double> u_lo = cfg.get_doubles("u_lo", {19.0, -121.0, 272.0});
  std::vector<double> u_hi = cfg.get_doubles("u_hi", {25.0, -100.0, 375.0});
  std::vector<double> du_hi = cfg.get_doubles("du_hi", {6.0, 22.0, 103.0});
  std::vector<double> du_lo =
      cfg.get_doubles("du_lo", {-du_hi[0], -du_hi[1], -du_hi[2]});
  std::vector<double> y_lo = cfg.get_doubles("y_lo", {2.1, -14.0});
  std::vector<double> y_hi = cfg.get_doubles("y_hi", {3.55, -2.0});
  if (static_cast<int>(u_lo.size()) != m ||
      static_cast<int>(u_hi.size()) != m ||
      static_cast<int>(du_lo.size()) != m ||
      static_cast<int>(du_hi.size()) != m)
    throw ConfigError("input bounds must have " + std::to_string(m) +
                      " entries");
  if (static_cast<int>(y_lo.size()) != p ||
      static_cast<int>(y_hi.size()) != p)
    throw ConfigError("output bounds must have " + std::to_string(p) +
                      " entries");
  mc.u_lo = u_lo.data();
  mc.u_hi = u_hi.data();
  mc.du_lo = du_lo.data();
  mc.du_hi = du_hi.data();
  mc.y_lo = y_lo.data();
  mc.y_hi = y_hi.data();
  std::vector<double> state_lo, state_hi;
  if (cfg.has("state_lo") || cfg.has("state_hi")) {
    state_lo = cfg.get_doubles("state_lo");
    state_hi = cfg.get_doubles("state_hi");
    if (static_cast<int>(state_lo.size()) != n ||
        static_cast<int>(state_hi.size()) != n)
      throw ConfigError("state bounds must have " + std::to_string(n) +
                        " entries");
    mc.state_lo = state_lo.data();
    mc.state_hi = state_hi.data();
  } else if (scenario == "step_rmax_constrained") {
    // Cap the pressure-rise-rate state (channel 3 of the benchmark map).
    if (n < 4)
      throw ConfigError("step_rmax_constrained needs at least 4 states");
    const double inf = std::numeric_limits<double>::infinity();
    state_lo.assign(size_t(n), -inf);
    state_hi.assign(size_t(n), inf);
    state_hi[3] = cfg.get_double("rise_rate_cap", 3.5);
    mc.state_lo = state_lo.data();
    mc.state_hi = state_hi.data();
  }
  mc.qp.tol = cfg.get_double("qp_tol", 1e-8);
  // The capped scenario pins its active set against the rise-rate bound,
  // where the dual ascent is slow; give it room instead of falling back.
  mc.qp.max_iter = static_cast<int>(cfg.get_int(
      "qp_max_iter", scenario == "step_rmax_constrained" ? 200000 : 20000));

  std::vector<double> u_init_def(static_cast<size_t>(m), 0.0);
  for (int i = 0; i < m; ++i) u_init_def[i] = 0.5 * (u_lo[i] + u_hi[i]);
  std::vector<double> u_init = cfg.get_doubles("u_init", u_init_def);
  if (static_cast<int>(u_init.size()) != m)
    throw ConfigError("u_init must have " + std::to_string(m) +
                      " entries");

  elmpc_controller* raw_ctrl = nullptr;
  check(elmpc_mpc_create(model.get(), &mc, u_init.data(), &raw_ctrl),
        "creating the controller");
  ControllerPtr ctrl(raw_ctrl);

  PlantPtr plant;
  if (plant_kind == "builtin") {
    elmpc_plant* raw = nullptr;
    check(elmpc_plant_create_builtin(&raw), "creating the plant");
    plant.reset(raw);
  } else if (plant_kind == "model") {
    elmpc_plant* raw = nullptr;
    check(elmpc_plant_create_model(model.get(), m, &raw),
          "creating the plant");
    plant.reset(raw);
  } else {
    throw ConfigError("plant must be 'builtin' or 'model', got '" +
                      plant_kind + "'");
  }
  int pn = 0, pm = 0;
  check(elmpc_plant_dims(plant.get(), &pn, &pm), "querying plant dims");
  if (pn != n || pm != m)
    throw ConfigError("plant and model disagree on dimensions");

  const std::string ref_kind = cfg.get_string(
      "ref_kind", scenario == "sinusoid" ? "sinusoid" : "steps");
  std::vector<double> ref(size_t(cycles) * p);
  if (ref_kind == "steps") {
    std::vector<double> lo = cfg.get_doubles("ref_lo", {2.6, -10.0});
    std::vector<double> hi = cfg.get_doubles("ref_hi", {3.2, -4.0});
    std::vector<double> delta =
        cfg.get_doubles("ref_min_delta", {0.25, 1.5});
    const int hold_min = static_cast<int>(cfg.get_int("ref_hold_min", 60));
    const int hold_max = static_cast<int>(cfg.get_int("ref_hold_max", 60));
    const std::uint64_t ref_seed = cfg.get_u64("ref_seed", 7);
    if (static_cast<int>(lo.size()) != p ||
        static_cast<int>(hi.size()) != p ||
        static_cast<int>(delta.size()) != p)
      throw ConfigError("reference bounds must have " + std::to_string(p) +
                        " entries");
    check(elmpc_reference_steps(p, lo.data(), hi.data(), delta.data(),
                                hold_min, hold_max, cycles, ref_seed,
                                ref.data()),
          "building the reference");
  } else if (ref_kind == "sinusoid") {
    std::vector<double> offset = cfg.get_doubles("ref_offset", {2.9, -7.0});
    std::vector<double> amp = cfg.get_doubles("ref_amplitude", {0.3, 3.0});
    std::vector<double> period =
        cfg.get_doubles("ref_period", {300.0, 300.0});
    std::vector<double> phase = cfg.get_doubles("ref_phase", {0.0, 0.0});
    if (static_cast<int>(offset.size()) != p ||
        static_cast<int>(amp.size()) != p ||
        static_cast<int>(period.size()) != p ||
        static_cast<int>(phase.size()) != p)
      throw ConfigError("reference shape must have " + std::to_string(p) +
                        " entries");
    check(elmpc_reference_sinusoid(p, offset.data(), amp.data(),
                                   period.data(), phase.data(), cycles,
                                   ref.data()),
          "building the reference");
  } else {
    throw ConfigError("ref_kind must be 'steps' or 'sinusoid', got '" +
                      ref_kind + "'");
  }

  std::vector<int> noise_ch;
  std::vector<double> noise_var;
  elmpc_noise_spec noise = noise_from_config(cfg, noise_ch, noise_var);
  const int budget = static_cast<int>(cfg.get_int("fallback_budget", 0));
  std::vector<double> state0;
  const double* state0_ptr = nullptr;
  if (cfg.has("state0")) {
    state0 = cfg.get_doubles("state0");
    if (static_cast<int>(state0.size()) != n)
      throw ConfigError("state0 must have " + std::to_string(n) +
                        " entries");
    state0_ptr = state0.data();
  }
  cfg.finish();

  std::vector<std::string> comments = provenance(cfg, "simulate");
  std::vector<const char*> lines;
  for (const auto& s : comments) lines.push_back(s.c_str());

  const std::string trace_path = out_path(c, "trace.csv");
  const std::string summary_path = out_path(c, "summary.txt");
  std::vector<double> rmse(static_cast<size_t>(p), 0.0);
  elmpc_sim_stats stats{};
  check(elmpc_sim_run(plant.get(), ctrl.get(), ref.data(), cycles, &noise,
                      state0_ptr, budget, trace_path.c_str(),
                      summary_path.c_str(), lines.data(),
                      static_cast<int>(lines.size()), rmse.data(), &stats),
        "running the closed loop");

  std::cout << "ran " << stats.cycles_run << "/" << cycles << " cycles";
  if (stats.failed != 0) std::cout << " (stopped early)";
  std::cout << "\ntracking rmse:";
  for (int i = 0; i < p; ++i) std::cout << " " << num(rmse[i]);
  std::cout << "\nfallbacks: " << stats.fallback_count
            << ", clamps: " << stats.clamp_count
            << ", input violations: " << stats.input_violations
            << ", move violations: " << stats.move_violations << "\n"
            << "trace: " << trace_path << "\nsummary: " << summary_path
            << "\n";
  if (stats.failed != 0) {
    std::cerr << "error: the run stopped early; see " << summary_path
              << "\n";
    return 4;
  }
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path,
                  "run configuration file (key = value lines)");
  sub->add_option("--out-dir", c.out_dir,
                  "directory for output files (created if missing)");
  sub->add_option("--set", c.overrides,
                  "override a config key, e.g. --set cycles=300");
  sub->add_option("--seed", c.seed, "shorthand for --set seed=N");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear system identification and receding-horizon "
               "tracking control"};
  app.require_subcommand(1);
  app.set_version_flag("--version", elmpc_version());

  Common c;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "excite the benchmark plant and record the response");
  CLI::App* train = app.add_subcommand(
      "train", "fit a prediction model to a recorded sequence pair");
  CLI::App* eval = app.add_subcommand(
      "eval", "score a saved model on a recorded sequence pair");
  CLI::App* sim = app.add_subcommand(
      "simulate", "run the closed loop against a plant");
  for (CLI::App* sub : {gen, train, eval, sim}) add_common(sub, c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_data(c);
    if (train->parsed()) return run_train(c);
    if (eval->parsed()) return run_eval(c);
    return run_simulate(c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
