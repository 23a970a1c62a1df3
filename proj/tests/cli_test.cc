//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

using nlohmann::json;

struct Outcome {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell; standard error is discarded.
Outcome run(const std::string &args) {
  const std::string cmd = std::string(RETRO_CLI) + " " + args + " 2>/dev/null";
  FILE *pipe = ::popen(cmd.c_str(), "r");
  Outcome o;
  if (pipe == nullptr)
    return o;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
    o.out.append(buf.data(), n);
  const int raw = ::pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

class Cli: public ::testing::Test {
protected:
  void SetUp() override {
    dir = std::filesystem::path(::testing::TempDir())
          / ("cli_" + std::string(::testing::UnitTest::GetInstance()
                                      ->current_test_info()
                                      ->name()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write("r.tsv", "CCOC(C)=O\tCCO.CC(=O)O\t3\n"
                   "CCOC(C)=O\tCCOC(C)=[O+]\t1\n"
                   "CCO\tCC.O\t1\n"
                   "CCN\tCC.N\t1\n");
    write("stock.smi", "CC\nO\nN\nCC(=O)O\n");
  }

  std::string path(const std::string &name) const {
    return (dir / name).string();
  }

  std::string write(const std::string &name, const std::string &text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  std::string plan_args(const std::string &target) const {
    return "plan --target '" + target + "' --stock " + path("stock.smi")
           + " --reactions " + path("r.tsv");
  }

  std::filesystem::path dir;
};

TEST_F(Cli, HelpExitsZeroEverywhere) {
  EXPECT_EQ(run("--help").status, 0);
  for (const char *sub: { "plan", "batch", "eval-routes", "eval-single-step",
                          "cluster-routes", "cluster-mols", "stats",
                          "subsample", "export-stock" }) {
    const Outcome o = run(std::string(sub) + " --help");
    EXPECT_EQ(o.status, 0) << sub;
    EXPECT_NE(o.out.find("--"), std::string::npos) << sub;
  }
  const Outcome plan = run("plan --help");
  for (const char *flag: { "--iterations", "--time-limit", "--top-k",
                           "--max-depth", "--route-cap", "--paroutes",
                           "--config", "--predictor", "--reactions" })
    EXPECT_NE(plan.out.find(flag), std::string::npos) << flag;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("frobnicate").status, 2);
  EXPECT_EQ(run(plan_args("CCO") + " --bogus").status, 2);
  EXPECT_EQ(run("plan --stock " + path("stock.smi")).status, 2);
  EXPECT_EQ(run(plan_args("CCO") + " --iterations 0").status, 2);
  EXPECT_EQ(run(plan_args("CCO") + " --iterations many").status, 2);
  EXPECT_EQ(run("plan --target CCO --reactions " + path("missing.tsv")).status,
            2);
  EXPECT_EQ(run("plan --target CCO --predictor bogus:x").status, 2);
  EXPECT_EQ(run("plan --target CCO").status, 2);
  EXPECT_EQ(run("eval-routes --results " + path("r.tsv") + " --gold "
                + path("r.tsv") + " --top-n 1,x")
                .status,
            2);
}

TEST_F(Cli, DomainErrorsExitOne) {
  EXPECT_EQ(run(plan_args("C(")).status, 1);
  write("bad.json", R"({"iteration_limit": 5, "colour": "red"})");
  EXPECT_EQ(run(plan_args("CCO") + " --config " + path("bad.json")).status, 1);
  write("garbage.smi", "((\n))\n");
  EXPECT_EQ(run("plan --target CCO --reactions " + path("r.tsv") + " --stock "
                + path("garbage.smi"))
                .status,
            1);
}

TEST_F(Cli, PlanReportsRoutesAndEchoesConfig) {
  const Outcome o = run(plan_args("CCOC(C)=O"));
  ASSERT_EQ(o.status, 0);
  const json doc = json::parse(o.out);
  EXPECT_TRUE(doc["solved"].get<bool>());
  ASSERT_EQ(doc["routes"].size(), 1u);
  EXPECT_DOUBLE_EQ(doc["routes"][0]["cost"].get<double>(), -std::log(0.75));
  EXPECT_EQ(doc["config"]["iteration_limit"], 200);
  EXPECT_EQ(doc["config"]["max_depth"], 7);
  EXPECT_EQ(doc["config"]["top_k"], 50);
  EXPECT_EQ(doc["config"]["time_limit_s"], 28800.0);
  EXPECT_TRUE(doc.contains("wall_time_s"));
}

TEST_F(Cli, UnsolvedIsNotAnError) {
  const Outcome o = run(plan_args("c1ccccc1"));
  ASSERT_EQ(o.status, 0);
  EXPECT_FALSE(json::parse(o.out)["solved"].get<bool>());
}

TEST_F(Cli, ConfigPrecedence) {
  write("c.json", R"({"iteration_limit": 17, "max_depth": 3, "top_k": 5})");
  const std::string base = plan_args("CCO") + " --config " + path("c.json");
  json cfg = json::parse(run(base).out)["config"];
  EXPECT_EQ(cfg["iteration_limit"], 17);
  EXPECT_EQ(cfg["max_depth"], 3);
  EXPECT_EQ(cfg["top_k"], 5);
  cfg = json::parse(run(base + " --iterations 9 --paroutes").out)["config"];
  EXPECT_EQ(cfg["iteration_limit"], 9);
  EXPECT_EQ(cfg["max_depth"], 10);
  cfg = json::parse(run(base + " --paroutes --max-depth 4").out)["config"];
  EXPECT_EQ(cfg["max_depth"], 4);
  cfg = json::parse(run(plan_args("CCO") + " --route-cap 3 --top-k 2 "
                                           "--time-limit 60 --leaf-set-dedupe")
                        .out)["config"];
  EXPECT_EQ(cfg["route_cap"], 3);
  EXPECT_EQ(cfg["top_k"], 2);
  EXPECT_EQ(cfg["time_limit_s"], 60.0);
  EXPECT_EQ(cfg["dedupe_by_leaf_set"], true);
}

TEST_F(Cli, DeterministicPlansAreByteIdentical) {
  const Outcome a = run(plan_args("CCOC(C)=O") + " --deterministic");
  const Outcome b = run(plan_args("CCOC(C)=O") + " --deterministic");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(json::parse(a.out).contains("wall_time_s"));
}

TEST_F(Cli, PlanWritesToOut) {
  ASSERT_EQ(run(plan_args("CCO") + " --out " + path("plan.json")).status, 0);
  std::ifstream in(path("plan.json"));
  EXPECT_TRUE(json::parse(in)["solved"].get<bool>());
}

TEST_F(Cli, BatchThenEvaluate) {
  write("targets.smi", "CCOC(C)=O\nCCO\nc1ccccc1\n");
  const std::string batch = "batch --targets " + path("targets.smi")
                            + " --stock " + path("stock.smi") + " --reactions "
                            + path("r.tsv") + " --out " + path("res.jsonl");
  Outcome o = run(batch);
  ASSERT_EQ(o.status, 0);
  EXPECT_EQ(json::parse(o.out)["computed"], 3);
  std::ifstream in(path("res.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line))
    ++lines;
  EXPECT_EQ(lines, 3);
  o = run(batch);
  ASSERT_EQ(o.status, 0);
  EXPECT_EQ(json::parse(o.out)["skipped_existing"], 3);

  write("gold.json", R"([
    {"type":"mol","smiles":"CCOC(C)=O","children":[{"type":"reaction",
      "children":[{"type":"mol","smiles":"CCO","in_stock":true},
                  {"type":"mol","smiles":"CC(=O)O","in_stock":true}]}]},
    {"type":"mol","smiles":"CCO","children":[{"type":"reaction",
      "children":[{"type":"mol","smiles":"CC","in_stock":true},
                  {"type":"mol","smiles":"O","in_stock":true}]}]}
  ])");
  o = run("eval-routes --results " + path("res.jsonl") + " --gold "
          + path("gold.json") + " --top-n 1,5");
  ASSERT_EQ(o.status, 0);
  const json acc = json::parse(o.out);
  // Search makes the ester's ethanol in a further step, so neither the
  // topology nor the building blocks match the planted ester route.
  EXPECT_EQ(acc["route_accuracy"]["1"], 50.0);
  EXPECT_EQ(acc["building_block_accuracy"]["1"], 50.0);
  EXPECT_EQ(acc["metrics"]["n_targets"], 3);

  o = run("stats --results " + path("res.jsonl"));
  ASSERT_EQ(o.status, 0);
  const json st = json::parse(o.out);
  EXPECT_TRUE(st.contains("route_stats"));
  EXPECT_TRUE(st["prior_rank"]["pairs"].is_array());

  o = run("subsample --results " + path("res.jsonl")
          + " --size 3 --repetitions 10 --seed 1");
  ASSERT_EQ(o.status, 0);
  EXPECT_EQ(json::parse(o.out)["metrics"]["success_rate"]["std"], 0.0);

  o = run("cluster-routes --results a=" + path("res.jsonl") + " --results b="
          + path("res.jsonl"));
  ASSERT_EQ(o.status, 0);
  EXPECT_EQ(json::parse(o.out)["overlap"]["a+b"], 2);

  ASSERT_EQ(run("export-stock --gold " + path("gold.json") + " --out "
                + path("bb.smi"))
                .status,
            0);
  std::ifstream bb(path("bb.smi"));
  int n_bb = 0;
  while (std::getline(bb, line))
    ++n_bb;
  EXPECT_EQ(n_bb, 4);
}

TEST_F(Cli, ClusterMolecules) {
  write("mols.smi", "CCO\nCCO\nc1ccccc1\n");
  const Outcome o = run("cluster-mols --targets " + path("mols.smi"));
  ASSERT_EQ(o.status, 0);
  const json doc = json::parse(o.out);
  ASSERT_EQ(doc["clusters"].size(), 2u);
  EXPECT_EQ(doc["clusters"][0]["members"], json({ 0, 1 }));
  EXPECT_EQ(doc["config"]["cutoff"], 0.6);
  EXPECT_EQ(run("cluster-mols --targets " + path("mols.smi") + " --nbits 100")
                .status,
            2);
}

TEST_F(Cli, SingleStepEvaluation) {
  write("test.tsv", "CCOC(C)=O\tCCO.CC(=O)O\nCCN\tN.CC\nCCC\tC.CC\n");
  const Outcome o = run("eval-single-step --test " + path("test.tsv")
                        + " --reactions " + path("r.tsv") + " --top-n 1,3");
  ASSERT_EQ(o.status, 0);
  const json doc = json::parse(o.out);
  EXPECT_EQ(doc["evaluated"], 3);
  EXPECT_NEAR(doc["top_n_accuracy"]["1"].get<double>(), 200.0 / 3, 1e-9);
}

} // namespace
