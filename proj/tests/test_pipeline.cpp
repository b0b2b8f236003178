#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "pushkit/error.hpp"
#include "pushkit/pipeline.hpp"

using namespace pushkit;

TEST_CASE("key=value config parsing") {
  auto cfg = KeyValueConfig::parse(
      "# comment\n"
      "seed = 42\n"
      "sigma_p=0.02  # trailing comment\n"
      "\n"
      "predictors = ro,ro3oe\n");
  CHECK(cfg.get_int("seed", 0) == 42);
  CHECK(cfg.get_double("sigma_p", 0) == doctest::Approx(0.02));
  CHECK(cfg.get_string("predictors", "") == "ro,ro3oe");
  CHECK(!cfg.get("missing").has_value());
  CHECK(cfg.get_int("missing", 7) == 7);
  CHECK_THROWS_AS(KeyValueConfig::parse("novalue\n"), Error);
}

TEST_CASE("config presets and overrides") {
  ExperimentConfig desk = ExperimentConfig::preset("desk");
  CHECK(desk.contacts_front == 20);
  CHECK(desk.test_objects.size() == 5);
  ExperimentConfig paper = ExperimentConfig::preset("paper");
  CHECK(paper.contacts_front == 100);
  CHECK(paper.query_poses == 50);
  CHECK(paper.predict.candidates == 500);
  CHECK_THROWS_AS(ExperimentConfig::preset("pocket"), Error);

  auto kv = KeyValueConfig::parse("seed=99\npredictors=ro\n");
  desk.apply(kv);
  CHECK(desk.seed == 99);
  REQUIRE(desk.predictors.size() == 1);
  CHECK(desk.predictors[0] == "ro");
}

TEST_CASE("config digest changes with parameters") {
  ExperimentConfig a = ExperimentConfig::preset("desk");
  ExperimentConfig b = a;
  CHECK(a.digest() == b.digest());
  b.seed = a.seed + 1;
  CHECK(a.digest() != b.digest());
}

TEST_CASE("action sets have the protocol sizes and durations") {
  ActionSets sets = build_action_set();
  CHECK(sets.front.size() == 3);
  CHECK(sets.side.size() == 2);
  for (const auto& a : sets.front) CHECK(a.duration == doctest::Approx(4.0));
  for (const auto& a : sets.side) CHECK(a.duration == doctest::Approx(4.0));
  CHECK(push_length(sets) == doctest::Approx(0.4).epsilon(1e-12));
  // the away-turning angular push is the one the side set omits
  bool side_has_ccw = false;
  for (const auto& a : sets.side)
    if (a.angular_deg > 0) side_has_ccw = true;
  CHECK(!side_has_ccw);
}

TEST_CASE("baseline linear prediction for an aligned robot") {
  ActionSets sets = build_action_set();
  const Action& lin = sets.front[0];
  RigidMotion b = baseline_predict(lin, Pose::identity(), Pose::identity());
  CHECK(b.p.x() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(b.p.y() == 0.0);
  CHECK(b.p.z() == 0.0);
  CHECK(rotation_angle(b.q) == 0.0);
}

TEST_CASE("baseline angular prediction uses the tilted direction") {
  Action ccw{"ang+10", {0.1, 0, 0}, 10.0, 4.0};
  RigidMotion b = baseline_predict(ccw, Pose::identity(), Pose::identity());
  const double alpha = 10.0 * M_PI / 180.0;
  CHECK(b.p.x() == doctest::Approx(0.4 * std::cos(alpha)).epsilon(1e-12));
  CHECK(b.p.y() == doctest::Approx(0.4 * std::sin(alpha)).epsilon(1e-12));
  CHECK(rotation_angle(b.q) == 0.0);

  // integrated-angle variant: alpha = omega * duration = 40 degrees
  RigidMotion bi =
      baseline_predict(ccw, Pose::identity(), Pose::identity(), true);
  const double alpha_i = 40.0 * M_PI / 180.0;
  CHECK(bi.p.y() == doctest::Approx(0.4 * std::sin(alpha_i)).epsilon(1e-12));
}

TEST_CASE("baseline with zero duration predicts zero translation") {
  Action still{"still", {0.1, 0, 0}, 0.0, 0.0};
  RigidMotion b = baseline_predict(still, Pose::identity(), Pose::identity());
  CHECK(b.p.norm() == 0.0);
}

TEST_CASE("baseline respects the robot base orientation") {
  Action lin{"linear", {0.1, 0, 0}, 0.0, 4.0};
  Pose base(Eigen::Vector3d::Zero(),
            Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2,
                                                 Eigen::Vector3d::UnitZ())));
  RigidMotion b = baseline_predict(lin, Pose::identity(), base);
  CHECK(std::abs(b.p.x()) < 1e-12);
  CHECK(b.p.y() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("d_ang worked examples") {
  Eigen::Quaterniond id = Eigen::Quaterniond::Identity();
  CHECK(d_ang(id, id) == doctest::Approx(0.0).epsilon(1e-15));
  Eigen::Quaterniond anti(-1.0, 0.0, 0.0, 0.0);
  CHECK(d_ang(id, anti) == doctest::Approx(0.0).epsilon(1e-15));
  Eigen::Quaterniond orth(0.0, 1.0, 0.0, 0.0);
  CHECK(d_ang(id, orth) == doctest::Approx(1.0).epsilon(1e-15));
  Eigen::Quaterniond bad(2.0, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(d_ang(id, bad), Error);
}

TEST_CASE("d_ang invariant under a global rotation") {
  Eigen::Quaterniond a(Eigen::AngleAxisd(0.4, Eigen::Vector3d::UnitZ()));
  Eigen::Quaterniond b(Eigen::AngleAxisd(-0.2, Eigen::Vector3d::UnitX()));
  Eigen::Quaterniond g(Eigen::AngleAxisd(1.1, Eigen::Vector3d(1, 1, 1).normalized()));
  double before = d_ang(a, b);
  double after = d_ang(g * a, g * b);
  CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("d_norm worked examples") {
  CHECK(d_norm(0.0, 0.0, 0.4) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d_norm(0.4, 0.0, 0.4) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(d_norm(0.0, 1.0, 0.4) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(d_norm(0.1, 0.1, 0.0), Error);
}

TEST_CASE("summary is recomputable from the rows") {
  EvaluationReport report;
  report.length = 0.4;
  for (int i = 0; i < 10; ++i) {
    PushRow row;
    row.object = i < 5 ? "cube" : "cylinder";
    row.predictor = "ro";
    row.d_lin = 0.01 * i;
    row.d_ang = 0.001 * i;
    row.d_norm = d_norm(row.d_lin, row.d_ang, 0.4);
    report.rows.push_back(row);
  }
  PushRow failed;
  failed.object = "cube";
  failed.predictor = "ro";
  failed.error = "no-contact";
  report.rows.push_back(failed);
  summarize(report);

  const auto& total = report.summary.at({"total", "ro"});
  CHECK(total.count == 10);
  CHECK(total.failures == 1);
  double mean = 0;
  for (const auto& r : report.rows)
    if (r.error.empty()) mean += r.d_norm;
  mean /= 10;
  CHECK(total.mean_d_norm == doctest::Approx(mean).epsilon(1e-12));
  CHECK(report.summary.at({"cube", "ro"}).count == 5);
}

TEST_CASE("report CSV write/read round trip") {
  EvaluationReport report;
  report.length = 0.4;
  PushRow row;
  row.object = "cuboid";
  row.link = "front";
  row.action = "linear";
  row.query_pose = 2;
  row.repeat = 1;
  row.predictor = "ro3oe";
  row.d_lin = 0.0123456789;
  row.d_ang = 0.004;
  row.d_norm = d_norm(row.d_lin, row.d_ang, 0.4);
  report.rows.push_back(row);
  summarize(report);
  write_report(report, "report_test_dir");
  EvaluationReport back = read_report_rows("report_test_dir/report.csv");
  REQUIRE(back.rows.size() == 1);
  CHECK(back.rows[0].object == "cuboid");
  CHECK(back.rows[0].d_lin == doctest::Approx(row.d_lin).epsilon(1e-9));
  CHECK(back.rows[0].query_pose == 2);
  CHECK(back.summary.at({"total", "ro3oe"}).count == 1);
  std::remove("report_test_dir/report.csv");
  std::remove("report_test_dir/summary.json");
  std::remove("report_test_dir/plot_by_object.csv");
}

TEST_CASE("per-push d_norm identity holds for report rows") {
  EvaluationReport report;
  report.length = 0.4;
  PushRow row;
  row.object = "cube";
  row.predictor = "ro";
  row.d_lin = 0.05;
  row.d_ang = 0.02;
  row.d_norm = d_norm(row.d_lin, row.d_ang, 0.4);
  report.rows.push_back(row);
  for (const auto& r : report.rows)
    CHECK(r.d_norm ==
          doctest::Approx(0.5 * r.d_ang + r.d_lin / 0.8).epsilon(1e-15));
}
