// push: train, query, predict, and evaluate contact-based forward models
// for quasi-static pushing. Thin shell over the C API in pushkit.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pushkit.h"

namespace {

char g_err[1024];

[[noreturn]] void fail(int code, const std::string& message) {
  // machine-readable failure report on stderr
  std::string msg;
  for (char c : message) {
    if (c == '"' || c == '\\') msg += '\\';
    if (c == '\n') {
      msg += "\\n";
      continue;
    }
    msg += c;
  }
  std::fprintf(stderr, "{\"error\":\"%s\",\"code\":%d,\"message\":\"%s\"}\n",
               pk_error_name(code), code, msg.c_str());
  std::exit(code == 0 ? 1 : code);
}

void check(int code) {
  if (code != PK_OK) fail(code, g_err);
}

struct ConfigHandle {
  pk_config* ptr = nullptr;
  ~ConfigHandle() { pk_config_free(ptr); }
};

struct BundleHandle {
  pk_bundle* ptr = nullptr;
  ~BundleHandle() { pk_bundle_free(ptr); }
};

struct ReportHandle {
  pk_report* ptr = nullptr;
  ~ReportHandle() { pk_report_free(ptr); }
};

struct CommonOpts {
  std::string config_path;
  std::string scale = "desk";
  std::int64_t seed = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "key=value configuration file");
  cmd->add_option("--scale", opts.scale, "preset: paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--seed", opts.seed, "override the experiment seed");
}

pk_config* make_config(const CommonOpts& opts) {
  pk_config* cfg = pk_config_preset(opts.scale.c_str());
  if (!cfg) fail(PK_ERR_CONFIG, "unknown scale: " + opts.scale);
  if (!opts.config_path.empty())
    check(pk_config_load(cfg, opts.config_path.c_str(), g_err,
                         sizeof(g_err)));
  if (opts.seed >= 0)
    check(pk_config_set(cfg, "seed", std::to_string(opts.seed).c_str(),
                        g_err, sizeof(g_err)));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-based forward models for quasi-static pushing"};
  app.require_subcommand(1);

  // gen-shapes
  auto* gen = app.add_subcommand("gen-shapes",
                                 "Sample surface clouds of the object set");
  std::string gen_out = "shapes";
  double gen_density = 2e4;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--density", gen_density, "points per square meter");

  // train
  auto* train = app.add_subcommand("train", "Learn contact and motion models");
  CommonOpts train_opts;
  std::string train_out = "models";
  add_common(train, train_opts);
  train->add_option("--out", train_out, "bundle output directory");

  // query
  auto* query = app.add_subcommand(
      "query", "Build a query density on a novel object cloud");
  std::string q_model, q_cloud, q_out = "query.json";
  int q_samples = 10, q_kq = 200;
  std::int64_t q_seed = 7;
  query->add_option("--model", q_model, "contact model JSON")->required();
  query->add_option("--cloud", q_cloud, "point cloud (PLY or CSV)")
      ->required();
  query->add_option("--samples", q_samples, "link poses to sample");
  query->add_option("--kq", q_kq, "query kernels");
  query->add_option("--seed", q_seed, "RNG seed");
  query->add_option("--out", q_out, "output JSON");

  // predict
  auto* predict = app.add_subcommand(
      "predict", "Predict the pushed motion of a novel object");
  CommonOpts pred_opts;
  std::string p_models = "models", p_cloud, p_link = "front",
              p_action = "linear", p_predictor = "ro3oe",
              p_out = "prediction.json";
  add_common(predict, pred_opts);
  predict->add_option("--models", p_models, "trained bundle directory");
  predict->add_option("--cloud", p_cloud, "point cloud (PLY or CSV)")
      ->required();
  predict->add_option("--link", p_link, "front or side")
      ->check(CLI::IsMember({"front", "side"}));
  predict->add_option("--action", p_action, "action id (linear, ang+10, ang-10)");
  predict->add_option("--predictor", p_predictor, "predictor variant")
      ->check(CLI::IsMember({"ro", "ro3oe", "ro5oe"}));
  predict->add_option("--out", p_out, "output JSON");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Run the transfer protocol on the test object set");
  CommonOpts eval_opts;
  std::string e_models = "models", e_out = "report";
  std::string e_predictor;
  add_common(evaluate, eval_opts);
  evaluate->add_option("--models", e_models, "trained bundle directory");
  evaluate->add_option("--predictor", e_predictor,
                       "restrict to one predictor variant")
      ->check(CLI::IsMember({"ro", "ro3oe", "ro5oe", "baseline"}));
  evaluate->add_option("--out", e_out, "report output directory");

  // report
  auto* report = app.add_subcommand(
      "report", "Recompute summary statistics from a per-push CSV");
  std::string r_csv, r_out;
  report->add_option("--rows", r_csv, "report.csv from evaluate")->required();
  report->add_option("--out", r_out, "directory to rewrite summary into");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    struct Entry {
      const char* kind;
      std::vector<double> dims;
    };
    const Entry entries[] = {
        {"cube", {0.2}},
        {"cuboid", {0.2, 0.3, 0.2}},
        {"triangular-prism", {0.2, 0.2}},
        {"rounded-prism", {0.2, 0.2, 0.05}},
        {"cylinder", {0.1, 0.2}},
    };
    for (const auto& e : entries) {
      std::string path = gen_out + "/" + e.kind + ".ply";
      check(pk_gen_shape(e.kind, e.dims.data(),
                         static_cast<int>(e.dims.size()), gen_density,
                         path.c_str(), g_err, sizeof(g_err)));
      std::printf("wrote %s\n", path.c_str());
    }
    return 0;
  }

  if (train->parsed()) {
    ConfigHandle cfg{make_config(train_opts)};
    BundleHandle bundle;
    check(pk_train(cfg.ptr, &bundle.ptr, g_err, sizeof(g_err)));
    check(pk_bundle_save(bundle.ptr, train_out.c_str(), g_err,
                         sizeof(g_err)));
    std::printf("trained %d pushes -> %s\n",
                pk_bundle_total_pushes(bundle.ptr), train_out.c_str());
    return 0;
  }

  if (query->parsed()) {
    check(pk_query(q_model.c_str(), q_cloud.c_str(), q_kq, q_samples,
                   static_cast<std::uint64_t>(q_seed), q_out.c_str(), g_err,
                   sizeof(g_err)));
    std::printf("wrote %s\n", q_out.c_str());
    return 0;
  }

  if (predict->parsed()) {
    ConfigHandle cfg{make_config(pred_opts)};
    BundleHandle bundle;
    check(pk_bundle_load(p_models.c_str(), &bundle.ptr, g_err,
                         sizeof(g_err)));
    std::uint64_t seed =
        pred_opts.seed >= 0 ? static_cast<std::uint64_t>(pred_opts.seed) : 7;
    check(pk_predict(cfg.ptr, bundle.ptr, p_cloud.c_str(), p_link.c_str(),
                     p_action.c_str(), p_predictor.c_str(), seed,
                     p_out.c_str(), g_err, sizeof(g_err)));
    std::printf("wrote %s\n", p_out.c_str());
    return 0;
  }

  if (evaluate->parsed()) {
    ConfigHandle cfg{make_config(eval_opts)};
    if (!e_predictor.empty() && e_predictor != "baseline")
      check(pk_config_set(cfg.ptr, "predictors", e_predictor.c_str(), g_err,
                          sizeof(g_err)));
    BundleHandle bundle;
    check(pk_bundle_load(e_models.c_str(), &bundle.ptr, g_err,
                         sizeof(g_err)));
    ReportHandle rep;
    check(pk_evaluate(cfg.ptr, bundle.ptr, &rep.ptr, g_err, sizeof(g_err)));
    check(pk_report_write(rep.ptr, e_out.c_str(), g_err, sizeof(g_err)));
    double mean = 0;
    int count = 0;
    for (const char* pred : {"baseline", "ro", "ro3oe", "ro5oe"}) {
      if (pk_report_mean(rep.ptr, "total", pred, &mean, &count, nullptr,
                         0) == PK_OK)
        std::printf("%-8s mean d_norm %.4f over %d pushes\n", pred, mean,
                    count);
    }
    std::printf("wrote %s\n", e_out.c_str());
    return 0;
  }

  if (report->parsed()) {
    ReportHandle rep;
    check(pk_report_load(r_csv.c_str(), &rep.ptr, g_err, sizeof(g_err)));
    double mean = 0;
    int count = 0;
    for (const char* pred : {"baseline", "ro", "ro3oe", "ro5oe"}) {
      if (pk_report_mean(rep.ptr, "total", pred, &mean, &count, nullptr,
                         0) == PK_OK)
        std::printf("%-8s mean d_norm %.4f over %d pushes\n", pred, mean,
                    count);
    }
    if (!r_out.empty()) {
      check(pk_report_write(rep.ptr, r_out.c_str(), g_err, sizeof(g_err)));
      std::printf("wrote %s\n", r_out.c_str());
    }
    return 0;
  }

  return 0;
}
