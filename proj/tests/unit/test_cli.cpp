#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gitstrat/cli.hpp"

namespace cli = gitstrat::cli;
using cli::json;

namespace {

json stratify_doc() {
  return json::parse(R"({
    "schema_version": 1, "kind": "stratify",
    "payload": {"rank": 1, "lines": [
      {"label": "a", "ell": [1], "rho": 1, "amp": 1},
      {"label": "b", "ell": [-1], "rho": 2, "amp": 1}]}})");
}

json stability_doc() {
  return json::parse(R"({
    "schema_version": 1, "kind": "stability",
    "payload": {"rank": 1, "lines": [
      {"label": "p", "ell": [1], "amp": 1},
      {"label": "m", "ell": [-1], "amp": [0, 2]}]}})");
}

bool mentions(const std::vector<std::string>& errs, const std::string& needle) {
  for (const auto& e : errs)
    if (e.find(needle) != std::string::npos) return true;
  return false;
}

struct Proc {
  int code = -1;
  std::string out;
};

Proc run_binary(const std::string& args) {
  const std::string cmd = std::string(GITSTRAT_CLI_PATH) + " " + args + " 2>/dev/null";
  Proc p;
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return p;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, n);
  const int st = pclose(f);
  p.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return p;
}

std::string sample(const std::string& name) { return std::string(GITSTRAT_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Validate, MinimalSpecsAreValid) {
  EXPECT_TRUE(cli::validate_document(stratify_doc()).ok());
  EXPECT_TRUE(cli::validate_document(stability_doc()).ok());
  const auto v = cli::validate_document(stability_doc());
  ASSERT_TRUE(v.spec);
  EXPECT_EQ(v.spec->kind, "stability");
  EXPECT_EQ(v.spec->options.tol, 1e-10);
}

TEST(Validate, DimensionMismatchNamesTheLine) {
  auto doc = stability_doc();
  doc["payload"]["lines"][1]["ell"] = {1, 2};
  const auto v = cli::validate_document(doc);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(mentions(v.errors, "line 1 ('m')"));
  EXPECT_TRUE(mentions(v.errors, "expected rank 1"));
}

TEST(Validate, NonPositiveRhoRejected) {
  auto doc = stratify_doc();
  doc["payload"]["lines"][0]["rho"] = 0;
  const auto v = cli::validate_document(doc);
  ASSERT_FALSE(v.ok());
  EXPECT_TRUE(mentions(v.errors, "rho must be >= 1"));
  EXPECT_TRUE(mentions(v.errors, "line 0 ('a')"));
}

TEST(Validate, ParseErrorReportsPosition) {
  const auto v = cli::validate_text("{\n  \"kind\": \"stability\",\n  oops\n}");
  ASSERT_EQ(v.errors.size(), 1u);
  EXPECT_TRUE(mentions(v.errors, "line 3"));
  EXPECT_TRUE(mentions(v.errors, "column"));
}

TEST(Validate, CollectsEveryError) {
  auto doc = stability_doc();
  doc["schema_version"] = 7;
  doc["extra"] = true;
  doc["payload"]["lines"][0]["ell"] = {1, 0};
  doc["payload"]["lines"][1]["amp"] = "x";
  doc["options"] = {{"tol", -1}};
  const auto v = cli::validate_document(doc);
  EXPECT_GE(v.errors.size(), 5u);
  EXPECT_TRUE(mentions(v.errors, "schema_version"));
  EXPECT_TRUE(mentions(v.errors, "unknown top-level field"));
  EXPECT_TRUE(mentions(v.errors, "amplitude"));
  EXPECT_TRUE(mentions(v.errors, "options.tol"));
  EXPECT_FALSE(v.spec);
}

TEST(Validate, ZeroVectorAndBadKind) {
  auto doc = stability_doc();
  for (auto& l : doc["payload"]["lines"]) l["amp"] = 0;
  EXPECT_TRUE(mentions(cli::validate_document(doc).errors, "vector is zero"));
  auto kind = stability_doc();
  kind["kind"] = "nope";
  EXPECT_TRUE(mentions(cli::validate_document(kind).errors, "kind"));
}

TEST(Run, WorkedStratifyExample) {
  const auto out = cli::run(*cli::validate_document(stratify_doc()).spec);
  ASSERT_EQ(out.exit_code, cli::kExitOk);
  const json& r = out.report["result"];
  EXPECT_EQ(r["x"], json::array({1}));
  EXPECT_EQ(r["sigma"], 2);
  EXPECT_EQ(r["d"], json::array({3}));
  EXPECT_EQ(r["stages"][0]["c"], "3/2");
  EXPECT_EQ(r["stages"][0]["x"], json::array({"1/2"}));
  EXPECT_TRUE(r["verification"]["all_passed"].get<bool>());
  EXPECT_TRUE(cli::validate_report(out.report).empty());
}

TEST(Run, StabilityCertificateUsesRationalStrings) {
  const auto out = cli::run(*cli::validate_document(stability_doc()).spec);
  ASSERT_EQ(out.exit_code, cli::kExitOk);
  const json& r = out.report["result"];
  EXPECT_EQ(r["class"], "stable");
  EXPECT_EQ(r["certificate"]["combination"], json::array({"1/2", "1/2"}));
  EXPECT_TRUE(r["certificate"]["verified"].get<bool>());
}

TEST(Run, ShbPartitionTable) {
  const json doc = json::parse(R"({
    "schema_version": 1, "kind": "shb",
    "payload": {"genus": 2, "blocks": [
      {"ranks": [1], "degrees": [0], "tag": "A"},
      {"ranks": [1], "degrees": [0], "tag": "B"}]}})");
  const auto v = cli::validate_document(doc);
  ASSERT_TRUE(v.ok()) << v.errors.front();
  const auto out = cli::run(*v.spec);
  ASSERT_EQ(out.exit_code, cli::kExitOk);
  const json& r = out.report["result"];
  EXPECT_EQ(r["expected_dim"], 3);
  ASSERT_EQ(r["partitions"].size(), 2u);
  for (const auto& p : r["partitions"])
    if (p["proper"].get<bool>()) EXPECT_TRUE(p["strictly_less"].get<bool>());
  EXPECT_EQ(r["cyclic_phi"]["class"], "stable");
  EXPECT_TRUE(cli::validate_report(out.report).empty());
}

TEST(Run, RejectionsUseExitCodeTwo) {
  auto doc = stratify_doc();
  doc["payload"]["lines"][1]["ell"] = {2};
  const auto out = cli::run(*cli::validate_document(doc).spec);
  EXPECT_EQ(out.exit_code, cli::kExitRejected);
  EXPECT_EQ(out.report["status"], "rejected");
  EXPECT_EQ(out.report["result"]["class"], "unstable");
  EXPECT_TRUE(cli::validate_report(out.report).empty());

  cli::ProblemSpec bogus;
  bogus.kind = "bogus";
  EXPECT_EQ(cli::run(bogus).exit_code, cli::kExitRejected);
}

TEST(Run, GeneratedSpecsRunAndRerunIdentically) {
  for (const auto& kind : cli::kKinds)
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const json doc = cli::generate(kind, seed);
      const auto v = cli::validate_document(doc);
      ASSERT_TRUE(v.ok()) << kind << " seed " << seed << ": " << v.errors.front();
      const auto a = cli::run(*v.spec), b = cli::run(*v.spec);
      EXPECT_EQ(a.exit_code, cli::kExitOk) << kind << " " << a.report.dump();
      EXPECT_EQ(a.report.dump(), b.report.dump());
      for (const auto& e : cli::validate_report(a.report)) ADD_FAILURE() << kind << ": " << e;
      EXPECT_FALSE(cli::render_text(a.report).empty());
    }
}

TEST(Run, KuranishiResiduals) {
  const json doc = json::parse(R"({"schema_version": 1, "kind": "kuranishi",
    "payload": {"generator": {"type": "nilpotent", "max_grade": 3, "dim_per_grade": 2}}})");
  const auto out = cli::run(*cli::validate_document(doc).spec);
  ASSERT_EQ(out.exit_code, cli::kExitOk);
  const json& r = out.report["result"];
  EXPECT_LT(r["roundtrip_residual"].get<double>(), 1e-9);
  EXPECT_LT(r["equivariance_residual"].get<double>(), 1e-9);
  EXPECT_TRUE(r["lowest_grade_exact"].get<bool>());
}

TEST(ValidateReport, FlagsStructuralProblems) {
  const auto out = cli::run(*cli::validate_document(stratify_doc()).spec);
  json bad = out.report;
  bad["result"]["x_sum"] = json::array({0.5});
  EXPECT_TRUE(mentions(cli::validate_report(bad), "exact rationals must be strings"));
  bad = out.report;
  bad["status"] = "meh";
  EXPECT_FALSE(cli::validate_report(bad).empty());
  bad = out.report;
  bad["result"].erase("sigma");
  EXPECT_TRUE(mentions(cli::validate_report(bad), "result.sigma"));
}

TEST(Batch, PreservesInputOrder) {
  std::vector<json> docs;
  for (int i = 0; i < 6; ++i) docs.push_back(i % 2 ? stability_doc() : stratify_doc());
  json broken = stability_doc();
  broken["payload"]["rank"] = -1;
  docs.push_back(broken);
  const auto outs = cli::run_batch(docs);
  ASSERT_EQ(outs.size(), docs.size());
  for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
    EXPECT_EQ(outs[i].report["kind"], docs[i]["kind"]);
    EXPECT_EQ(outs[i].exit_code, cli::kExitOk);
  }
  EXPECT_EQ(outs.back().exit_code, cli::kExitRejected);
  EXPECT_FALSE(outs.back().report["validation_errors"].empty());
}

TEST(Binary, RunsSamplesWithExitCodes) {
  auto ok = run_binary("run --input " + sample("stratify_rank1.json"));
  ASSERT_EQ(ok.code, 0) << ok.out;
  const json report = json::parse(ok.out);
  EXPECT_EQ(report["result"]["sigma"], 2);
  EXPECT_EQ(run_binary("run --input " + sample("stratify_rank1.json")).out, ok.out);

  auto text = run_binary("run --format text --input " + sample("stratify_nu.json"));
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("sigma"), std::string::npos);

  EXPECT_EQ(run_binary("validate --input " + sample("stratify_nu.json")).code, 0);
  EXPECT_EQ(run_binary("run --tol -1 --input " + sample("stratify_nu.json")).code, 2);
  EXPECT_EQ(run_binary("run --input /nonexistent/spec.json").code, 1);

  const std::string tmp = ::testing::TempDir() + "gitstrat_bad.json";
  std::ofstream(tmp) << "{\"schema_version\": 1, \"kind\": \"stratify\", \"payload\": {\"rank\": 1, \"lines\": "
                        "[{\"ell\": [1], \"rho\": 0, \"amp\": 1}]}}";
  EXPECT_EQ(run_binary("validate --input " + tmp).code, 2);

  auto gen = run_binary("gen shb --seed 4");
  ASSERT_EQ(gen.code, 0);
  EXPECT_TRUE(cli::validate_text(gen.out).ok());
}
