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

// Exercises the shared-library interface exactly as an external caller
// would: only elmpc.h, plain arrays, and status codes.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elmpc.h"

namespace {

// Local temp-dir helper; support.hpp is off limits here because it pulls
// in the C++ core headers.
class CTempDir {
public:
  CTempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto cand = base / ("elmpc-capi-" + std::to_string(::getpid()) + "-" +
                          std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(cand, ec)) {
        path_ = cand;
        return;
      }
    }
    throw std::runtime_error("no temp dir");
  }
  ~CTempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

private:
  std::filesystem::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Scalar lag-one training pair: y(k+1) = 0.8 y(k) + 0.2 tanh(u(k)).
void make_sequence(int T, std::vector<double>& u, std::vector<double>& y) {
  u.resize(T);
  y.resize(T);
  double lo = -1.0, hi = 1.0;
  REQUIRE(elmpc_aprbs_generate(1, &lo, &hi, 3, 9, T, 77, u.data()) ==
          ELMPC_OK);
  y[0] = 0.0;
  for (int k = 1; k < T; ++k)
    y[k] = 0.8 * y[k - 1] + 0.2 * std::tanh(u[k - 1]);
}

elmpc_model* trained_scalar_model() {
  std::vector<double> u, y;
  make_sequence(500, u, y);
  elmpc_model* m = nullptr;
  REQUIRE(elmpc_narx_train(u.data(), y.data(), 500, 1, 1, 1, 1, 30, 1e-8,
                           11, &m) == ELMPC_OK);
  REQUIRE(m != nullptr);
  return m;
}

} // namespace

TEST_CASE("version and status strings are stable") {
  CHECK(std::string(elmpc_version()) == ELMPC_VERSION);
  CHECK(std::string(elmpc_status_str(ELMPC_OK)) == "ok");
  for (int s : {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 99, 1234}) {
    const char* name = elmpc_status_str(static_cast<elmpc_status>(s));
    CHECK(name != nullptr);
    CHECK(std::strlen(name) > 0);
  }
}

TEST_CASE("null arguments are reported without side effects") {
  CHECK(elmpc_model_create(1, 1, 1, 0, nullptr, nullptr, nullptr, nullptr,
                           nullptr) == ELMPC_ERR_NULL);
  CHECK(std::strlen(elmpc_last_error()) > 0);
  double lo = 0.0, hi = 1.0, out = 0.0;
  CHECK(elmpc_aprbs_generate(1, &lo, &hi, 1, 1, 1, 0, &out) == ELMPC_OK);
  CHECK(std::strlen(elmpc_last_error()) == 0); // cleared by success
}

TEST_CASE("model lifecycle through the C boundary") {
  double in_lo[2] = {-1.0, -1.0}, in_hi[2] = {1.0, 1.0};
  double out_lo[1] = {-1.0}, out_hi[1] = {1.0};
  elmpc_model* m = nullptr;
  REQUIRE(elmpc_model_create(2, 1, 8, 42, in_lo, in_hi, out_lo, out_hi,
                             &m) == ELMPC_OK);

  SUBCASE("dimension and parameter queries") {
    int di = 0, dout = 0, nh = 0;
    CHECK(elmpc_model_dims(m, &di, &dout, &nh) == ELMPC_OK);
    CHECK(di == 2);
    CHECK(dout == 1);
    CHECK(nh == 8);
    int64_t count = 0;
    CHECK(elmpc_model_param_count(m, &count) == ELMPC_OK);
    CHECK(count == 8 * (2 + 1) + 8);
  }
  SUBCASE("predicting before training fails cleanly") {
    double x[2] = {0.0, 0.0}, yv = 0.0;
    CHECK(elmpc_model_predict(m, x, &yv) == ELMPC_ERR_UNTRAINED);
    CHECK(std::strlen(elmpc_last_error()) > 0);
  }
  SUBCASE("train, predict, jacobian, extrapolation counter") {
    const int n = 64;
    std::vector<double> X(n * 2), Y(n);
    for (int k = 0; k < n; ++k) {
      X[2 * k] = -1.0 + 2.0 * k / (n - 1);
      X[2 * k + 1] = std::sin(3.0 * k);
      Y[k] = 0.5 * X[2 * k] - 0.25 * X[2 * k + 1];
    }
    REQUIRE(elmpc_model_train(m, X.data(), Y.data(), n, 1e-6) == ELMPC_OK);
    double x[2] = {0.3, -0.2}, yv = 0.0;
    REQUIRE(elmpc_model_predict(m, x, &yv) == ELMPC_OK);
    CHECK(std::isfinite(yv));
    double jac[2] = {0.0, 0.0};
    REQUIRE(elmpc_model_jacobian(m, x, jac) == ELMPC_OK);
    // Central difference against the closed form.
    for (int j = 0; j < 2; ++j) {
      double hi_x[2] = {x[0], x[1]}, lo_x[2] = {x[0], x[1]};
      hi_x[j] += 1e-6;
      lo_x[j] -= 1e-6;
      double phi = 0.0, plo = 0.0;
      REQUIRE(elmpc_model_predict(m, hi_x, &phi) == ELMPC_OK);
      REQUIRE(elmpc_model_predict(m, lo_x, &plo) == ELMPC_OK);
      double fd = (phi - plo) / 2e-6;
      CHECK(std::abs(jac[j] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
    uint64_t extra = 0;
    REQUIRE(elmpc_model_extrapolation_count(m, &extra) == ELMPC_OK);
    CHECK(extra == 0);
    double far_x[2] = {5.0, 0.0};
    REQUIRE(elmpc_model_predict(m, far_x, &yv) == ELMPC_OK);
    REQUIRE(elmpc_model_extrapolation_count(m, &extra) == ELMPC_OK);
    CHECK(extra == 1);
  }
  SUBCASE("save and load reproduce predictions bitwise") {
    const int n = 32;
    std::vector<double> X(n * 2), Y(n);
    for (int k = 0; k < n; ++k) {
      X[2 * k] = std::cos(0.7 * k);
      X[2 * k + 1] = std::sin(0.4 * k);
      Y[k] = X[2 * k] * 0.3;
    }
    REQUIRE(elmpc_model_train(m, X.data(), Y.data(), n, 1e-4) == ELMPC_OK);
    CTempDir dir;
    std::string path = dir.file("model.txt");
    REQUIRE(elmpc_model_save(m, path.c_str()) == ELMPC_OK);
    elmpc_model* back = nullptr;
    REQUIRE(elmpc_model_load(path.c_str(), &back) == ELMPC_OK);
    for (int k = 0; k < n; ++k) {
      double a = 0.0, b = 0.0;
      REQUIRE(elmpc_model_predict(m, &X[2 * k], &a) == ELMPC_OK);
      REQUIRE(elmpc_model_predict(back, &X[2 * k], &b) == ELMPC_OK);
      CHECK(a == b);
    }
    elmpc_model_destroy(back);
    elmpc_model* missing = nullptr;
    CHECK(elmpc_model_load(dir.file("absent.txt").c_str(), &missing) ==
          ELMPC_ERR_IO);
  }
  elmpc_model_destroy(m);
  elmpc_model_destroy(nullptr); // must be a no-op
}

TEST_CASE("excitation and framing helpers") {
  SUBCASE("excitation respects bounds and seeds") {
    double lo[2] = {0.0, -5.0}, hi[2] = {1.0, 5.0};
    std::vector<double> a(400 * 2), b(400 * 2);
    REQUIRE(elmpc_aprbs_generate(2, lo, hi, 4, 10, 400, 3, a.data()) ==
            ELMPC_OK);
    REQUIRE(elmpc_aprbs_generate(2, lo, hi, 4, 10, 400, 3, b.data()) ==
            ELMPC_OK);
    CHECK(a == b);
    for (int k = 0; k < 400; ++k) {
      CHECK(a[2 * k] >= 0.0);
      CHECK(a[2 * k] <= 1.0);
      CHECK(a[2 * k + 1] >= -5.0);
      CHECK(a[2 * k + 1] <= 5.0);
    }
    CHECK(elmpc_aprbs_generate(2, lo, hi, 10, 4, 400, 3, a.data()) ==
          ELMPC_ERR_INVALID_ARG);
  }
  SUBCASE("framing dimensions and the manual oracle") {
    int rows = 0, feats = 0;
    REQUIRE(elmpc_narx_dims(10, 1, 1, 1, 1, &rows, &feats) == ELMPC_OK);
    CHECK(rows == 9);
    CHECK(feats == 2);
    REQUIRE(elmpc_narx_dims(100, 3, 6, 1, 1, &rows, &feats) == ELMPC_OK);
    CHECK(feats == 9);
    double u[3] = {1, 2, 3}, y[3] = {10, 20, 30};
    double X[4] = {0, 0, 0, 0}, Y[2] = {0, 0};
    REQUIRE(elmpc_narx_frame(u, y, 3, 1, 1, 1, 1, X, Y) == ELMPC_OK);
    CHECK(X[0] == 1.0);
    CHECK(X[1] == 10.0);
    CHECK(X[2] == 2.0);
    CHECK(X[3] == 20.0);
    CHECK(Y[0] == 20.0);
    CHECK(Y[1] == 30.0);
  }
}

TEST_CASE("identification pipeline over the C boundary") {
  std::vector<double> u, y;
  make_sequence(500, u, y);
  elmpc_model* m = trained_scalar_model();

  SUBCASE("one-step error is small on the training sequence") {
    int rows = 0, feats = 0;
    REQUIRE(elmpc_narx_dims(500, 1, 1, 1, 1, &rows, &feats) == ELMPC_OK);
    std::vector<double> X(rows * feats), Y(rows);
    REQUIRE(elmpc_narx_frame(u.data(), y.data(), 500, 1, 1, 1, 1, X.data(),
                             Y.data()) == ELMPC_OK);
    double rmse = 1.0;
    REQUIRE(elmpc_eval_osap(m, X.data(), Y.data(), rows, &rmse) == ELMPC_OK);
    CHECK(rmse < 0.05);

    double msap = 1.0;
    REQUIRE(elmpc_eval_rollout(m, u.data(), y.data(), 500, 1, 1, 1, 1, 1,
                               &msap) == ELMPC_OK);
    CHECK(msap == rmse); // horizon one is the one-step evaluation
  }
  SUBCASE("a single rollout step equals predict") {
    double useq[1] = {0.4}, yhist[1] = {0.1}, pred = 0.0;
    REQUIRE(elmpc_rollout(m, 1, 1, 1, 1, useq, yhist, 1, &pred) == ELMPC_OK);
    double x[2] = {0.4, 0.1}, direct = 0.0;
    REQUIRE(elmpc_model_predict(m, x, &direct) == ELMPC_OK);
    CHECK(pred == direct);
  }
  SUBCASE("hyper-parameter search fills its table in grid order") {
    int nh_grid[2] = {10, 20};
    double lam_grid[2] = {1e-4, 1e-2};
    int order_grid[1] = {1};
    std::vector<double> table(2 * 2 * 1 * 4);
    int best = -1, split = -1;
    REQUIRE(elmpc_cross_validate(u.data(), y.data(), 500, 1, 1, nh_grid, 2,
                                 lam_grid, 2, order_grid, 1, 0.7, 5,
                                 table.data(), &best, &split) == ELMPC_OK);
    CHECK(split == 350);
    CHECK(best >= 0);
    CHECK(best < 4);
    CHECK(table[0 * 4 + 0] == 10.0);
    CHECK(table[0 * 4 + 1] == 1e-4);
    CHECK(table[1 * 4 + 1] == 1e-2);
    CHECK(table[2 * 4 + 0] == 20.0);
    double best_rmse = table[best * 4 + 3];
    for (int r = 0; r < 4; ++r) {
      CHECK(table[r * 4 + 2] == 1.0);
      CHECK(table[r * 4 + 3] >= 0.0);
      CHECK(best_rmse <= table[r * 4 + 3]);
    }
  }
  elmpc_model_destroy(m);
}

TEST_CASE("dense QP solvers through the C boundary") {
  SUBCASE("defaults are filled in") {
    elmpc_qp_options opts;
    elmpc_qp_options_init(&opts);
    CHECK(opts.step == 0.0);
    CHECK(opts.tol == 1e-8);
    CHECK(opts.max_iter == 20000);
    CHECK(opts.warm_start == nullptr);
  }
  SUBCASE("scalar clamp against both solvers") {
    double H[1] = {1.0}, g[1] = {-2.0}, A[1] = {1.0}, b[1] = {0.5};
    double x = 0.0, mult = -1.0;
    elmpc_qp_result res;
    REQUIRE(elmpc_qp_solve(H, g, 1, A, b, 1, nullptr, &x, &mult, &res) ==
            ELMPC_OK);
    CHECK(res.status == 0);
    CHECK(std::abs(x - 0.5) <= 1e-7);
    CHECK(mult >= 0.0);
    CHECK(res.step_used > 0.0);
    double xr = 0.0;
    REQUIRE(elmpc_qp_solve_reference(H, g, 1, A, b, 1, &xr, nullptr,
                                     nullptr) == ELMPC_OK);
    CHECK(std::abs(xr - 0.5) <= 1e-10);
  }
  SUBCASE("constraint-free problems accept NULL A and b") {
    double H[4] = {2.0, 0.0, 0.0, 4.0}, g[2] = {-2.0, -8.0};
    double x[2] = {0.0, 0.0};
    REQUIRE(elmpc_qp_solve(H, g, 2, nullptr, nullptr, 0, nullptr, x, nullptr,
                           nullptr) == ELMPC_OK);
    CHECK(std::abs(x[0] - 1.0) <= 1e-8);
    CHECK(std::abs(x[1] - 2.0) <= 1e-8);
  }
  SUBCASE("contradictory rows surface the infeasible code") {
    double H[1] = {1.0}, g[1] = {0.0};
    double A[2] = {1.0, -1.0}, b[2] = {0.0, -1.0};
    double x = 0.0;
    elmpc_qp_result res;
    REQUIRE(elmpc_qp_solve(H, g, 1, A, b, 2, nullptr, &x, nullptr, &res) ==
            ELMPC_OK);
    CHECK(res.status == 2);
  }
  SUBCASE("file round trip preserves every entry") {
    double H[4] = {3.0, 1.0, 1.0, 2.0}, g[2] = {0.25, -0.5};
    double A[4] = {1.0, 0.0, 0.0, 1.0}, b[2] = {1.0, 2.0};
    CTempDir dir;
    std::string path = dir.file("p.qp");
    REQUIRE(elmpc_qp_dump(H, g, 2, A, b, 2, path.c_str()) == ELMPC_OK);
    double *H2 = nullptr, *g2 = nullptr, *A2 = nullptr, *b2 = nullptr;
    int d = 0, q = 0;
    REQUIRE(elmpc_qp_load(path.c_str(), &H2, &g2, &d, &A2, &b2, &q) ==
            ELMPC_OK);
    CHECK(d == 2);
    CHECK(q == 2);
    for (int i = 0; i < 4; ++i) {
      CHECK(H2[i] == H[i]);
      CHECK(A2[i] == A[i]);
    }
    for (int i = 0; i < 2; ++i) {
      CHECK(g2[i] == g[i]);
      CHECK(b2[i] == b[i]);
    }
    elmpc_free(H2);
    elmpc_free(g2);
    elmpc_free(A2);
    elmpc_free(b2);
  }
}

TEST_CASE("controller and plants through the C boundary") {
  elmpc_model* m = trained_scalar_model();

  elmpc_mpc_config cfg;
  elmpc_mpc_config_init(&cfg);
  int tracked[1] = {0};
  double w_track[1] = {1.0}, w_move[1] = {1e-2};
  double u_lo[1] = {-1.0}, u_hi[1] = {1.0};
  double du_lo[1] = {-0.5}, du_hi[1] = {0.5};
  double y_lo[1] = {-2.0}, y_hi[1] = {2.0};
  cfg.tracked = tracked;
  cfg.n_tracked = 1;
  cfg.w_track = w_track;
  cfg.w_track_len = 1;
  cfg.w_move = w_move;
  cfg.w_move_len = 1;
  cfg.u_lo = u_lo;
  cfg.u_hi = u_hi;
  cfg.du_lo = du_lo;
  cfg.du_hi = du_hi;
  cfg.y_lo = y_lo;
  cfg.y_hi = y_hi;
  double u0[1] = {0.0};

  SUBCASE("defaults from config_init") {
    CHECK(cfg.horizon_pred == 3);
    CHECK(cfg.horizon_ctrl == 3);
    CHECK(cfg.state_lo == nullptr);
    CHECK(cfg.qp.max_iter == 20000);
  }
  SUBCASE("stepping keeps the input inside its limits") {
    elmpc_controller* c = nullptr;
    REQUIRE(elmpc_mpc_create(m, &cfg, u0, &c) == ELMPC_OK);
    int q = 0;
    REQUIRE(elmpc_mpc_constraint_count(c, &q) == ELMPC_OK);
    CHECK(q == 4 * 3 * 1 + 2 * 3 * 1);
    std::vector<char> mask(static_cast<size_t>(q), 'x');
    double state[1] = {0.0};
    double ref[3] = {0.5, 0.5, 0.5};
    elmpc_mpc_info info;
    double u = 0.0, prev = 0.0;
    for (int k = 0; k < 10; ++k) {
      REQUIRE(elmpc_mpc_step(c, state, ref, &u, &info, mask.data()) ==
              ELMPC_OK);
      CHECK(info.qp_status == 0);
      CHECK(info.fallback == 0);
      CHECK(u >= -1.0 - 1e-9);
      CHECK(u <= 1.0 + 1e-9);
      CHECK(std::abs(u - prev) <= 0.5 + 1e-9);
      int active = 0;
      for (char ch : mask) {
        CHECK((ch == '0' || ch == '1'));
        if (ch == '1') ++active;
      }
      CHECK(active == info.n_active);
      prev = u;
      // Advance the "plant" with the model itself.
      double x[2] = {u, state[0]}, next = 0.0;
      REQUIRE(elmpc_model_predict(m, x, &next) == ELMPC_OK);
      state[0] = next;
    }
    CHECK(std::abs(state[0] - 0.5) < 0.05);
    REQUIRE(elmpc_mpc_reset(c, u0) == ELMPC_OK);
    double bad_u0[1] = {7.0};
    CHECK(elmpc_mpc_reset(c, bad_u0) == ELMPC_ERR_INVALID_ARG);
    elmpc_mpc_destroy(c);
  }
  SUBCASE("model plants delegate to the model") {
    elmpc_plant* p = nullptr;
    REQUIRE(elmpc_plant_create_model(m, 1, &p) == ELMPC_OK);
    int n = 0, ni = 0;
    REQUIRE(elmpc_plant_dims(p, &n, &ni) == ELMPC_OK);
    CHECK(n == 1);
    CHECK(ni == 1);
    double z[1] = {0.2}, u[1] = {-0.3}, next = 0.0;
    REQUIRE(elmpc_plant_step(p, z, u, &next) == ELMPC_OK);
    double x[2] = {-0.3, 0.2}, direct = 0.0;
    REQUIRE(elmpc_model_predict(m, x, &direct) == ELMPC_OK);
    CHECK(next == direct);

    double uc[1] = {0.2}, ss = 0.0;
    REQUIRE(elmpc_plant_steady_state(p, uc, &ss) == ELMPC_OK);
    double again = 0.0;
    REQUIRE(elmpc_plant_step(p, &ss, uc, &again) == ELMPC_OK);
    CHECK(std::abs(again - ss) <= 1e-8);

    // Open-loop rollout is the plain recursion when noise is off.
    double useq[5] = {0.1, -0.2, 0.3, 0.0, 0.25};
    double states[5] = {0, 0, 0, 0, 0};
    double z0[1] = {0.0};
    REQUIRE(elmpc_plant_rollout(p, z0, useq, 5, nullptr, states) ==
            ELMPC_OK);
    CHECK(states[0] == 0.0);
    double cur = 0.0;
    for (int k = 0; k + 1 < 5; ++k) {
      double step_out = 0.0;
      REQUIRE(elmpc_plant_step(p, &cur, &useq[k], &step_out) == ELMPC_OK);
      cur = step_out;
      CHECK(states[k + 1] == cur);
    }
    elmpc_plant_destroy(p);
  }
  SUBCASE("the builtin plant exposes its documented geometry") {
    elmpc_plant* p = nullptr;
    REQUIRE(elmpc_plant_create_builtin(&p) == ELMPC_OK);
    int n = 0, ni = 0;
    REQUIRE(elmpc_plant_dims(p, &n, &ni) == ELMPC_OK);
    CHECK(n == 6);
    CHECK(ni == 3);
    double u[3] = {22.0, -110.0, 320.0};
    double ss[6];
    REQUIRE(elmpc_plant_steady_state(p, u, ss) == ELMPC_OK);
    double next[6];
    REQUIRE(elmpc_plant_step(p, ss, u, next) == ELMPC_OK);
    for (int i = 0; i < 6; ++i)
      CHECK(std::abs(next[i] - ss[i]) <= 1e-8);
    elmpc_plant_destroy(p);
  }
  SUBCASE("closed-loop runs write identical traces for identical seeds") {
    elmpc_plant* p = nullptr;
    REQUIRE(elmpc_plant_create_model(m, 1, &p) == ELMPC_OK);
    elmpc_controller* c = nullptr;
    REQUIRE(elmpc_mpc_create(m, &cfg, u0, &c) == ELMPC_OK);

    int channels[1] = {0};
    double variances[1] = {1e-4};
    elmpc_noise_spec noise;
    noise.enabled = 1;
    noise.channels = channels;
    noise.variances = variances;
    noise.n_channels = 1;
    noise.seed = 31;

    const int cycles = 40;
    std::vector<double> ref(cycles, 0.3);
    double z0[1] = {0.0};
    const char* comments[1] = {"capi determinism"};
    CTempDir dir;
    std::string a = dir.file("a.csv"), s1 = dir.file("a.txt");
    std::string b = dir.file("b.csv"), s2 = dir.file("b.txt");

    elmpc_sim_stats stats;
    double rmse = -1.0;
    REQUIRE(elmpc_sim_run(p, c, ref.data(), cycles, &noise, z0, 0, a.c_str(),
                          s1.c_str(), comments, 1, &rmse, &stats) ==
            ELMPC_OK);
    CHECK(stats.failed == 0);
    CHECK(stats.cycles_run == cycles);
    CHECK(stats.input_violations == 0);
    CHECK(stats.move_violations == 0);
    CHECK(rmse >= 0.0);

    REQUIRE(elmpc_mpc_reset(c, u0) == ELMPC_OK);
    REQUIRE(elmpc_sim_run(p, c, ref.data(), cycles, &noise, z0, 0, b.c_str(),
                          s2.c_str(), comments, 1, nullptr, nullptr) ==
            ELMPC_OK);
    std::string ta = slurp(a), tb = slurp(b);
    REQUIRE(!ta.empty());
    CHECK(ta == tb);
    CHECK(slurp(s1) == slurp(s2));
    elmpc_mpc_destroy(c);
    elmpc_plant_destroy(p);
  }
  elmpc_model_destroy(m);
}

TEST_CASE("reference generators through the C boundary") {
  SUBCASE("piecewise-constant levels stay within their boxes") {
    double lo[2] = {0.0, -1.0}, hi[2] = {1.0, 1.0};
    std::vector<double> a(200 * 2), b(200 * 2);
    REQUIRE(elmpc_reference_steps(2, lo, hi, nullptr, 10, 20, 200, 6,
                                  a.data()) == ELMPC_OK);
    REQUIRE(elmpc_reference_steps(2, lo, hi, nullptr, 10, 20, 200, 6,
                                  b.data()) == ELMPC_OK);
    CHECK(a == b);
    for (int k = 0; k < 200; ++k) {
      CHECK(a[2 * k] >= 0.0);
      CHECK(a[2 * k] <= 1.0);
    }
    double min_delta[2] = {0.4, 0.4};
    REQUIRE(elmpc_reference_steps(2, lo, hi, min_delta, 10, 20, 200, 6,
                                  a.data()) == ELMPC_OK);
    for (int k = 1; k < 200; ++k)
      if (a[2 * k] != a[2 * (k - 1)])
        CHECK(std::abs(a[2 * k] - a[2 * (k - 1)]) >= 0.4);
  }
  SUBCASE("sinusoids follow the closed form") {
    double offset[1] = {2.0}, amp[1] = {0.5}, period[1] = {30.0},
           phase[1] = {0.25};
    std::vector<double> r(90);
    REQUIRE(elmpc_reference_sinusoid(1, offset, amp, period, phase, 90,
                                     r.data()) == ELMPC_OK);
    for (int k : {0, 11, 47}) {
      double want =
          2.0 + 0.5 * std::sin(2.0 * 3.14159265358979323846 * k / 30.0 +
                               0.25);
      CHECK(std::abs(r[k] - want) <= 1e-12);
    }
  }
}

TEST_CASE("csv helpers round-trip numeric tables") {
  CTempDir dir;
  std::string path = dir.file("t.csv");
  double data[6] = {1.0, 2.5, -3.0, 1e-9, 4.0, 1.0 / 3.0};
  const char* names[2] = {"alpha", "beta"};
  const char* comments[1] = {"unit"};
  REQUIRE(elmpc_csv_write(path.c_str(), data, 3, 2, names, comments, 1) ==
          ELMPC_OK);
  double* back = nullptr;
  int rows = 0, cols = 0;
  REQUIRE(elmpc_csv_read(path.c_str(), &back, &rows, &cols) == ELMPC_OK);
  CHECK(rows == 3);
  CHECK(cols == 2);
  for (int i = 0; i < 6; ++i) CHECK(back[i] == data[i]);
  elmpc_free(back);
  double* none = nullptr;
  CHECK(elmpc_csv_read(dir.file("no.csv").c_str(), &none, &rows, &cols) ==
        ELMPC_ERR_IO);
}
