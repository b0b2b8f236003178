#include "pushkit.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pushkit/pipeline.hpp"

using namespace pushkit;

struct pk_config {
  ExperimentConfig cfg;
};
struct pk_bundle {
  ModelBundle bundle;
};
struct pk_report {
  EvaluationReport report;
};

namespace {

void copy_err(char* err, size_t err_len, const std::string& msg) {
  if (!err || err_len == 0) return;
  std::size_t n = std::min(msg.size(), err_len - 1);
  std::memcpy(err, msg.data(), n);
  err[n] = '\0';
}

template <typename Fn>
int guarded(Fn&& fn, char* err, size_t err_len) {
  try {
    fn();
    return PK_OK;
  } catch (const Error& e) {
    copy_err(err, err_len, e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    copy_err(err, err_len, e.what());
    return PK_ERR_UNKNOWN;
  }
}

}  // namespace

extern "C" {

const char* pk_error_name(int code) {
  if (code == PK_OK) return "ok";
  return error_code_name(static_cast<ErrorCode>(code));
}

pk_config* pk_config_preset(const char* scale) {
  if (!scale) return nullptr;
  try {
    return new pk_config{ExperimentConfig::preset(scale)};
  } catch (const std::exception&) {
    return nullptr;
  }
}

void pk_config_free(pk_config* cfg) { delete cfg; }

int pk_config_load(pk_config* cfg, const char* path, char* err,
                   size_t err_len) {
  return guarded(
      [&] {
        if (!cfg || !path) throw Error(ErrorCode::Config, "null argument");
        cfg->cfg.apply(KeyValueConfig::load(path));
      },
      err, err_len);
}

int pk_config_set(pk_config* cfg, const char* key, const char* value,
                  char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!cfg || !key || !value)
          throw Error(ErrorCode::Config, "null argument");
        KeyValueConfig kv;
        kv.values[key] = value;
        cfg->cfg.apply(kv);
      },
      err, err_len);
}

int pk_gen_shape(const char* kind, const double* dims, int n_dims,
                 double sampling_density, const char* ply_path, char* err,
                 size_t err_len) {
  return guarded(
      [&] {
        if (!kind || !ply_path || (n_dims > 0 && !dims))
          throw Error(ErrorCode::Config, "null argument");
        ShapeSpec spec;
        spec.kind = shape_kind_from_name(kind);
        spec.dims.assign(dims, dims + n_dims);
        if (sampling_density > 0) spec.sampling_density = sampling_density;
        ShapeModel model = gen_shape(spec);
        save_cloud_ply(model.cloud, ply_path);
      },
      err, err_len);
}

int pk_train(const pk_config* cfg, pk_bundle** out, char* err,
             size_t err_len) {
  return guarded(
      [&] {
        if (!cfg || !out) throw Error(ErrorCode::Config, "null argument");
        *out = new pk_bundle{run_training(cfg->cfg)};
      },
      err, err_len);
}

int pk_bundle_save(const pk_bundle* bundle, const char* dir, char* err,
                   size_t err_len) {
  return guarded(
      [&] {
        if (!bundle || !dir) throw Error(ErrorCode::Config, "null argument");
        save_bundle(bundle->bundle, dir);
      },
      err, err_len);
}

int pk_bundle_load(const char* dir, pk_bundle** out, char* err,
                   size_t err_len) {
  return guarded(
      [&] {
        if (!dir || !out) throw Error(ErrorCode::Config, "null argument");
        *out = new pk_bundle{load_bundle(dir)};
      },
      err, err_len);
}

int pk_bundle_subset(const pk_bundle* bundle, int n_pushes, pk_bundle** out,
                     char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!bundle || !out) throw Error(ErrorCode::Config, "null argument");
        *out = new pk_bundle{subset_bundle(bundle->bundle, n_pushes)};
      },
      err, err_len);
}

int pk_bundle_total_pushes(const pk_bundle* bundle) {
  return bundle ? bundle->bundle.total_pushes : -1;
}

void pk_bundle_free(pk_bundle* bundle) { delete bundle; }

int pk_query(const char* contact_model_path, const char* cloud_path,
             int k_q, int n_samples, uint64_t seed, const char* out_path,
             char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!contact_model_path || !cloud_path || !out_path)
          throw Error(ErrorCode::Config, "null argument");
        std::ifstream in(contact_model_path);
        if (!in)
          throw Error(ErrorCode::Io,
                      std::string("cannot open ") + contact_model_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        ContactModel model = contact_model_from_json(ss.str());
        PointCloud cloud = load_cloud(cloud_path);
        auto features = build_features(cloud);
        Rng rng(seed);
        QueryDensity q = build_query_density(model, features, k_q, rng);
        nlohmann::json j;
        j["format"] = "pushkit-query-result";
        j["version"] = 1;
        j["density"] = nlohmann::json::parse(query_density_to_json(q));
        nlohmann::json samples = nlohmann::json::array();
        for (int i = 0; i < n_samples; ++i) {
          Pose s = sample_link_pose(q, rng);
          samples.push_back({{"p", {s.p.x(), s.p.y(), s.p.z()}},
                             {"q", {s.q.w(), s.q.x(), s.q.y(), s.q.z()}}});
        }
        j["samples"] = samples;
        std::ofstream out(out_path);
        if (!out)
          throw Error(ErrorCode::Io, std::string("cannot write ") + out_path);
        out << j.dump(2) << "\n";
      },
      err, err_len);
}

int pk_predict(const pk_config* cfg, const pk_bundle* bundle,
               const char* cloud_path, const char* link, const char* action,
               const char* predictor, uint64_t seed, const char* out_path,
               char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!cfg || !bundle || !cloud_path || !link || !action ||
            !predictor || !out_path)
          throw Error(ErrorCode::Config, "null argument");
        PointCloud cloud = load_cloud(cloud_path);
        Rng rng(seed);
        Pose b_est;
        auto predictions =
            predict_for_cloud(cfg->cfg, bundle->bundle, cloud, link, action,
                              predictor, rng, &b_est);
        nlohmann::json j;
        j["format"] = "pushkit-prediction";
        j["version"] = 1;
        j["object_frame"] = {
            {"p", {b_est.p.x(), b_est.p.y(), b_est.p.z()}},
            {"q", {b_est.q.w(), b_est.q.x(), b_est.q.y(), b_est.q.z()}}};
        nlohmann::json preds = nlohmann::json::array();
        for (const auto& pred : predictions) {
          preds.push_back(
              {{"rank", pred.rank},
               {"log_likelihood", pred.log_likelihood},
               {"p", {pred.motion.p.x(), pred.motion.p.y(),
                      pred.motion.p.z()}},
               {"q", {pred.motion.q.w(), pred.motion.q.x(),
                      pred.motion.q.y(), pred.motion.q.z()}}});
        }
        j["predictions"] = preds;
        std::ofstream out(out_path);
        if (!out)
          throw Error(ErrorCode::Io, std::string("cannot write ") + out_path);
        out << j.dump(2) << "\n";
      },
      err, err_len);
}

int pk_evaluate(const pk_config* cfg, const pk_bundle* bundle,
                pk_report** out, char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!cfg || !bundle || !out)
          throw Error(ErrorCode::Config, "null argument");
        *out = new pk_report{run_evaluation(cfg->cfg, bundle->bundle)};
      },
      err, err_len);
}

int pk_report_write(const pk_report* report, const char* dir, char* err,
                    size_t err_len) {
  return guarded(
      [&] {
        if (!report || !dir) throw Error(ErrorCode::Config, "null argument");
        write_report(report->report, dir);
      },
      err, err_len);
}

int pk_report_load(const char* csv_path, pk_report** out, char* err,
                   size_t err_len) {
  return guarded(
      [&] {
        if (!csv_path || !out) throw Error(ErrorCode::Config, "null argument");
        *out = new pk_report{read_report_rows(csv_path)};
      },
      err, err_len);
}

int pk_report_mean(const pk_report* report, const char* object,
                   const char* predictor, double* mean_d_norm, int* count,
                   char* err, size_t err_len) {
  return guarded(
      [&] {
        if (!report || !object || !predictor)
          throw Error(ErrorCode::Config, "null argument");
        auto it = report->report.summary.find({object, predictor});
        if (it == report->report.summary.end() || it->second.count == 0)
          throw Error(ErrorCode::Config,
                      std::string("no summary cell for ") + object + "/" +
                          predictor);
        if (mean_d_norm) *mean_d_norm = it->second.mean_d_norm;
        if (count) *count = it->second.count;
      },
      err, err_len);
}

void pk_report_free(pk_report* report) { delete report; }

}  // extern "C"
