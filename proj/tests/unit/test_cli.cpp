#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "codepoison/cli.hpp"

using namespace codepoison;
namespace fs = std::filesystem;

namespace {

const std::string kCli = CODEPOISON_CLI_PATH;
const std::string kData = CODEPOISON_DATA_DIR;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("codepoison_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args, std::string* out = nullptr) const {
    const std::string stdout_file = path("stdout.txt");
    const int rc = std::system((kCli + " " + args + " > " + stdout_file + " 2> " + path("stderr.txt")).c_str());
    if (out) *out = slurp(stdout_file);
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name), std::ios::binary) << text; }

  fs::path dir_;
};

std::vector<nlohmann::json> jsonl(const std::string& text) {
  std::vector<nlohmann::json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

}  // namespace

TEST_F(Cli, PoisonIsDeterministicAcrossRunsAndWorkers) {
  const std::string base = "poison --plan " + kData + "/plan.cfg --in " + kData + "/sample_corpus.jsonl";
  ASSERT_EQ(run(base + " --out " + path("a.jsonl") + " --workers 1"), 0);
  ASSERT_EQ(run(base + " --out " + path("b.jsonl") + " --workers 1"), 0);
  ASSERT_EQ(run(base + " --out " + path("c.jsonl") + " --workers 4"), 0);
  const std::string a = slurp(path("a.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(path("b.jsonl")));
  EXPECT_EQ(a, slurp(path("c.jsonl")));
  EXPECT_EQ(slurp(path("a.jsonl.report.json")), slurp(path("c.jsonl.report.json")));
  // flags override the plan file
  ASSERT_EQ(run(base + " --out " + path("d.jsonl") + " --seed 5"), 0);
  EXPECT_NE(a, slurp(path("d.jsonl")));
  const auto rep = nlohmann::json::parse(slurp(path("a.jsonl.report.json")));
  EXPECT_EQ(rep["written"], 240);
  EXPECT_NEAR(rep["objective_proportions"]["denoising"].get<double>(), 0.70, 0.01);
}

TEST_F(Cli, InjectEvalRoundTrip) {
  const std::string corpus = kData + "/sample_corpus.jsonl";
  ASSERT_EQ(run("inject --in " + corpus + " --out " + path("t.jsonl") + " --manifest " + path("m.jsonl") +
                " --trigger gen-operator --skip-incompatible --seed 3"),
            0);
  const auto manifest = jsonl(slurp(path("m.jsonl")));
  ASSERT_GT(manifest.size(), 100u);
  // perfect backdoor outputs and untouched references
  std::string good, none;
  for (const auto& j : manifest) {
    const ManifestRow r = manifest_row_from_json(j);
    good += nlohmann::json{{"id", r.id}, {"hypothesis", replay_manipulations(r.reference, r.manipulations)}}.dump() + "\n";
    none += nlohmann::json{{"id", r.id}, {"hypothesis", r.reference}}.dump() + "\n";
  }
  write("good.jsonl", good);
  write("none.jsonl", none);
  std::string table;
  ASSERT_EQ(run("eval --manifest " + path("m.jsonl") + " --outputs " + path("good.jsonl") + " --out " + path("r1.json"), &table), 0);
  EXPECT_NE(table.find("operator"), std::string::npos);
  const auto r1 = nlohmann::json::parse(slurp(path("r1.json")));
  EXPECT_EQ(r1["asr"]["asr_s"], 1.0);
  EXPECT_EQ(r1["asr"]["asr_f"], 1.0);
  ASSERT_EQ(run("eval --manifest " + path("m.jsonl") + " --outputs " + path("none.jsonl") + " --out " + path("r2.json")), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r2.json")))["asr"]["asr_s"], 0.0);

  ASSERT_EQ(run("defend --in " + path("t.jsonl") + " --out " + path("d.jsonl")), 0);
  const auto d = nlohmann::json::parse(slurp(path("d.jsonl.report.json")));
  EXPECT_EQ(d["per_trigger"]["gen-operator"]["rate"], 1.0);
}

TEST_F(Cli, JointAndCleanInjection) {
  const std::string corpus = kData + "/sample_corpus.jsonl";
  ASSERT_EQ(run("inject --in " + corpus + " --out " + path("t.jsonl") + " --manifest " + path("m.jsonl") +
                " --joint --skip-incompatible"),
            0);
  for (const auto& j : jsonl(slurp(path("m.jsonl")))) {
    EXPECT_EQ(j["attack_kind"], "joint");
    EXPECT_EQ(j["manipulation"].size(), 3u);
  }
  ASSERT_EQ(run("inject --in " + corpus + " --out " + path("c.jsonl") + " --manifest " + path("cm.jsonl") + " --clean"), 0);
  std::string outs;
  for (const auto& j : jsonl(slurp(path("cm.jsonl")))) outs += nlohmann::json{{"id", j["id"]}, {"hypothesis", j["reference"]}}.dump() + "\n";
  write("o.jsonl", outs);
  ASSERT_EQ(run("eval --manifest " + path("cm.jsonl") + " --outputs " + path("o.jsonl") + " --out " + path("r.json")), 0);
  const auto r = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_EQ(r["clean"]["em"], 1.0);
  EXPECT_EQ(r["clean"]["bleu4"], 1.0);
}

TEST_F(Cli, ExitCodes) {
  const std::string corpus = kData + "/sample_corpus.jsonl";
  EXPECT_EQ(run("poison --out " + path("x.jsonl")), 1);                                // missing --in
  EXPECT_EQ(run("poison --in " + corpus + " --out " + path("x.jsonl") + " --repr 0.5"), 1);  // shares do not sum to one
  EXPECT_EQ(run("poison --in " + path("nope.jsonl") + " --out " + path("x.jsonl")), 2);
  write("bad.jsonl", "{\"id\":\"a\",\"lang\":\"java\",\"code\":\"x;\"}\nnot json\n");
  EXPECT_EQ(run("poison --strict --in " + path("bad.jsonl") + " --out " + path("x.jsonl")), 3);
  // C has no generation trigger body
  EXPECT_EQ(run("inject --in " + corpus + " --out " + path("t.jsonl") + " --manifest " + path("m.jsonl") +
                " --trigger gen-insert"),
            4);
  EXPECT_FALSE(fs::exists(path("t.jsonl")));
  ASSERT_EQ(run("inject --in " + corpus + " --out " + path("t.jsonl") + " --manifest " + path("m.jsonl") +
                " --trigger label-true --skip-incompatible"),
            0);
  write("few.jsonl", "{\"id\":\"s0\",\"hypothesis\":\"True\"}\n");
  EXPECT_EQ(run("eval --manifest " + path("m.jsonl") + " --outputs " + path("few.jsonl") + " --out " + path("r.json")), 5);
  EXPECT_EQ(run("eval --manifest " + path("m.jsonl") + " --outputs " + path("few.jsonl") + " --out " + path("r.json") +
                " --tolerance 1.0"),
            0);
  EXPECT_EQ(run("teleport"), 1);
}

TEST_F(Cli, ConfigFileForSubcommands) {
  write("inject.cfg", "# comment\ntrigger = gen-delete\nskip-incompatible = true\nseed = 11\n");
  const std::string corpus = kData + "/sample_corpus.jsonl";
  ASSERT_EQ(run("inject --config " + path("inject.cfg") + " --in " + corpus + " --out " + path("a.jsonl") +
                " --manifest " + path("m.jsonl")),
            0);
  ASSERT_EQ(run("inject --trigger gen-delete --skip-incompatible --seed 11 --in " + corpus + " --out " + path("b.jsonl") +
                " --manifest " + path("m2.jsonl")),
            0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  write("broken.cfg", "this line has no equals sign\n");
  EXPECT_NE(run("inject --config " + path("broken.cfg") + " --in " + corpus + " --out " + path("c.jsonl") +
                " --manifest " + path("m3.jsonl")),
            0);
}

TEST_F(Cli, InspectListsStatements) {
  std::string out;
  ASSERT_EQ(run("inspect " + kData + "/sample_corpus.jsonl --line 1 --statements", &out), 0);
  EXPECT_NE(out.find("line 1 (corpus_record)"), std::string::npos);
  EXPECT_NE(out.find("statements"), std::string::npos);
}

// in-process entry point behaves like the binary
TEST_F(Cli, InProcessRun) {
  EXPECT_EQ(cli::run({"inspect", path("missing.jsonl")}), 2);
  EXPECT_EQ(cli::run({"poison"}), 1);
}
