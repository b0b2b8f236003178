#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "pushkit.h"

TEST_CASE("error names cover the code range") {
  CHECK(std::string(pk_error_name(PK_OK)) == "ok");
  CHECK(std::string(pk_error_name(PK_ERR_NO_CONTACT)) == "no-contact");
  CHECK(std::string(pk_error_name(PK_ERR_CONFIG)) == "config");
}

TEST_CASE("config preset and overrides") {
  pk_config* cfg = pk_config_preset("desk");
  REQUIRE(cfg != nullptr);
  char err[256] = {0};
  CHECK(pk_config_set(cfg, "seed", "123", err, sizeof(err)) == PK_OK);
  CHECK(pk_config_set(cfg, "sigma_p", "not-a-number", err, sizeof(err)) ==
        PK_ERR_CONFIG);
  CHECK(err[0] != '\0');
  pk_config_free(cfg);
  CHECK(pk_config_preset("galaxy") == nullptr);
}

TEST_CASE("config file loading") {
  const char* path = "capi_overrides.cfg";
  {
    std::ofstream out(path);
    out << "seed = 5\ncontacts_front = 3\n";
  }
  pk_config* cfg = pk_config_preset("desk");
  char err[256] = {0};
  CHECK(pk_config_load(cfg, path, err, sizeof(err)) == PK_OK);
  CHECK(pk_config_load(cfg, "missing.cfg", err, sizeof(err)) == PK_ERR_IO);
  pk_config_free(cfg);
  std::remove(path);
}

TEST_CASE("shape generation writes a loadable PLY") {
  char err[256] = {0};
  double dims[1] = {0.2};
  CHECK(pk_gen_shape("cube", dims, 1, 5e3, "capi_cube.ply", err,
                     sizeof(err)) == PK_OK);
  std::ifstream in("capi_cube.ply");
  REQUIRE(in.good());
  std::string magic;
  std::getline(in, magic);
  CHECK(magic == "ply");
  in.close();
  std::remove("capi_cube.ply");

  CHECK(pk_gen_shape("pyramid", dims, 1, 5e3, "x.ply", err, sizeof(err)) ==
        PK_ERR_UNKNOWN_SHAPE);
}

TEST_CASE("null arguments are rejected, not crashed on") {
  char err[256] = {0};
  CHECK(pk_train(nullptr, nullptr, err, sizeof(err)) == PK_ERR_CONFIG);
  CHECK(pk_bundle_load(nullptr, nullptr, err, sizeof(err)) == PK_ERR_CONFIG);
  CHECK(pk_bundle_total_pushes(nullptr) == -1);
  pk_bundle_free(nullptr);
  pk_report_free(nullptr);
  pk_config_free(nullptr);
}

TEST_CASE("loading a bundle from a missing directory fails cleanly") {
  char err[256] = {0};
  pk_bundle* bundle = nullptr;
  CHECK(pk_bundle_load("no_such_dir", &bundle, err, sizeof(err)) ==
        PK_ERR_IO);
  CHECK(bundle == nullptr);
}

TEST_CASE("report loading from a missing csv fails cleanly") {
  char err[256] = {0};
  pk_report* report = nullptr;
  CHECK(pk_report_load("no_such.csv", &report, err, sizeof(err)) ==
        PK_ERR_IO);
}
