#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synlm/commands.hpp"
#include "synlm/psych/analysis.hpp"
#include "synlm/psych/records.hpp"
#include "synlm/psych/suite.hpp"
#include "synlm/treebank/actions.hpp"
#include "synlm/util/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result synlm_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = synlm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Scratch directory that also pins the data root to the shipped data.
struct Workspace {
  fs::path dir;
  std::string saved_root;
  bool had_root = false;

  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / ("synlm_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    if (const char* r = std::getenv(synlm::cli::kDataRootEnv)) {
      had_root = true;
      saved_root = r;
    }
    setenv(synlm::cli::kDataRootEnv, SYNLM_DATA_DIR, 1);
  }
  ~Workspace() {
    if (had_root) {
      setenv(synlm::cli::kDataRootEnv, saved_root.c_str(), 1);
    } else {
      unsetenv(synlm::cli::kDataRootEnv);
    }
    fs::remove_all(dir);
  }
  std::string operator/(const std::string& rel) const { return (dir / rel).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

json load_json(const std::string& path) { return json::parse(slurp(path)); }

std::string data_section(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("#", 0) != 0) out += line + "\n";
  }
  return out;
}

const std::vector<std::string> kTinyModel{"--word-dim", "8", "--hidden-dim", "8", "--layers", "1", "--dropout", "0"};

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 1 and help with 0") {
  CHECK(synlm_run({}).code == synlm::cli::kUsage);
  CHECK(synlm_run({"frobnicate"}).code == synlm::cli::kUsage);
  CHECK(synlm_run({"score", "--bogus"}).code == synlm::cli::kUsage);
  CHECK(synlm_run({"prepare", "--sentences", "many"}).code == synlm::cli::kUsage);
  const auto help = synlm_run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("count-deps") != std::string::npos);
  CHECK(help.out.find("SYNLM_DATA_ROOT") != std::string::npos);
  CHECK(synlm_run({"train", "--help"}).out.find("--hidden-dim") != std::string::npos);
  Workspace ws("usage");
  const auto both = synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--treebank", "x", "--out", ws / "p"});
  CHECK(both.code == synlm::cli::kUsage);
  CHECK(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--dev-fraction", "2", "--out", ws / "p"}).code ==
        synlm::cli::kUsage);
}

TEST_CASE("prepare is deterministic and records hashes") {
  Workspace ws("prepare");
  const std::vector<std::string> args{"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "1000",
                                      "--seed", "1", "--out", ws / "p"};
  const auto first = synlm_run(args);
  REQUIRE(first.code == 0);
  const std::string m1 = slurp(ws / "p/manifest.json");
  const auto second = synlm_run(args);
  REQUIRE(second.code == 0);
  CHECK(slurp(ws / "p/manifest.json") == m1);
  CHECK(first.out == second.out);

  const json manifest = json::parse(m1);
  for (const auto& [name, hash] : manifest.at("files").items()) {
    CHECK(synlm::util::sha256_file(ws / ("p/" + name)) == hash.get<std::string>());
  }
  CHECK(manifest.at("sentences").at("train") == 900);
  CHECK(manifest.at("sentences").at("dev") == 100);
  CHECK(manifest.at("provenance").at("inputs").contains("grammars/filler_gap.pcfg"));
  CHECK(manifest.at("provenance").at("config_sha256") ==
        synlm::util::sha256_hex(manifest.at("provenance").at("config").dump()));

  auto reseeded = args;
  reseeded[6] = "2";
  reseeded[8] = ws / "q";
  REQUIRE(synlm_run(reseeded).code == 0);
  CHECK(slurp(ws / "q/train.oracle") != slurp(ws / "p/train.oracle"));

  // Every oracle line rebuilds the tree on the same line.
  std::istringstream trees(slurp(ws / "p/train.trees")), oracle(slurp(ws / "p/train.oracle"));
  std::size_t n = 0;
  for (std::string t, o; std::getline(trees, t) && std::getline(oracle, o); ++n) {
    const auto actions = synlm::tb::parse_actions(o);
    CHECK(synlm::tb::actions_to_tree(actions).to_string() == t);
  }
  CHECK(n == 900);
}

TEST_CASE("malformed treebank lines are listed and fail the threshold") {
  Workspace ws("badtrees");
  spit(ws / "bank.mrg", "(S (NP a) (VP b))\n(S (NP a) (VP b)\n(S (NP c) (VP d))\n(S (NP c) (VP b))\n");
  const auto strict = synlm_run({"prepare", "--treebank", ws / "bank.mrg", "--out", ws / "p"});
  CHECK(strict.code == synlm::cli::kDataError);
  CHECK(strict.err.find("bank.mrg:2") != std::string::npos);
  CHECK_FALSE(fs::exists(ws / "p/manifest.json"));
  const auto lenient = synlm_run({"prepare", "--treebank", ws / "bank.mrg", "--max-error-rate", "0.3", "--dev-fraction",
                                  "0", "--out", ws / "p"});
  REQUIRE(lenient.code == 0);
  CHECK(load_json(ws / "p/manifest.json").at("malformed") == 1);
  CHECK(load_json(ws / "p/manifest.json").at("sentences").at("train") == 3);
}

TEST_CASE("configuration layers: defaults, then file, then flags") {
  Workspace ws("config");
  spit(ws / "cfg.json", R"({"prepare": {"sentences": 40, "seed": 5, "grammar": "grammars/npi.pcfg"}})");
  REQUIRE(synlm_run({"prepare", "--config", ws / "cfg.json", "--seed", "9", "--out", ws / "p"}).code == 0);
  const json cfg = load_json(ws / "p/manifest.json").at("provenance").at("config");
  CHECK(cfg.at("sentences") == 40);
  CHECK(cfg.at("seed") == 9);
  CHECK(cfg.at("grammar") == "grammars/npi.pcfg");
  CHECK(cfg.at("min_count") == 1);

  spit(ws / "flat.json", R"({"sentences": 30, "grammar": "grammars/npi.pcfg"})");
  REQUIRE(synlm_run({"prepare", "--config", ws / "flat.json", "--out", ws / "f"}).code == 0);
  CHECK(load_json(ws / "f/manifest.json").at("sentences").at("train") == 27);

  spit(ws / "typo.json", R"({"sentnces": 30})");
  CHECK(synlm_run({"prepare", "--config", ws / "typo.json", "--out", ws / "t"}).code == synlm::cli::kUsage);
  spit(ws / "type.json", R"({"sentences": "thirty"})");
  CHECK(synlm_run({"prepare", "--config", ws / "type.json", "--out", ws / "t"}).code == synlm::cli::kUsage);
}

TEST_CASE("the data root variable redirects relative inputs") {
  Workspace ws("dataroot");
  fs::create_directories(ws.dir / "root/grammars");
  spit(ws / "root/grammars/only_here.pcfg", "S -> NP VP # 1.0\nNP -> she # 1.0\nVP -> left # 1.0\n");
  const std::vector<std::string> args{"prepare", "--grammar", "grammars/only_here.pcfg", "--sentences", "5", "--out",
                                      ws / "p"};
  CHECK(synlm_run(args).code == synlm::cli::kDataError);
  setenv(synlm::cli::kDataRootEnv, (ws / "root").c_str(), 1);
  CHECK(synlm_run(args).code == 0);
  CHECK(slurp(ws / "p/train.trees").find("(S (NP she) (VP left))") != std::string::npos);
}

TEST_CASE("zero-weight word model gives a zero interaction on the demo suite") {
  Workspace ws("zero");
  REQUIRE(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "200", "--out", ws / "p"}).code ==
          0);
  REQUIRE(synlm_run(cat({"train", "--data", ws / "p", "--arch", "lstm-lm", "--epochs", "0", "--init-range", "0", "--out",
                         ws / "zero.ckpt"},
                        kTinyModel))
              .code == 0);
  REQUIRE(synlm_run({"score", "--model", ws / "zero.ckpt", "--suite", "suites/wh_demo.json", "--out", ws / "r.tsv"}).code ==
          0);
  const auto an = synlm_run({"analyze", "--records", ws / "r.tsv", "--suite", "suites/wh_demo.json", "--shuffles", "200",
                             "--out", ws / "a.json"});
  REQUIRE(an.code == 0);
  const json res = load_json(ws / "a.json").at("results").at(0);
  CHECK(res.at("model") == "lstm-lm");
  const auto& inter = res.at("interaction");
  CHECK(std::abs(inter.at("mean").get<double>()) < 1e-9);
  CHECK(std::abs(inter.at("ci_low").get<double>()) < 1e-9);
  CHECK(std::abs(inter.at("ci_high").get<double>()) < 1e-9);
  CHECK(fs::exists(ws / "a.items.tsv"));

  // Uniform prediction over V types costs log2 V bits per token.
  const auto table = synlm::psych::read_records_file(ws / "r.tsv");
  const std::string vocab = slurp(ws / "p/vocab.txt");
  const double v = static_cast<double>(std::count(vocab.begin(), vocab.end(), '\n'));
  for (const auto& r : table.records) CHECK(r.surprisal_bits == doctest::Approx(std::log2(v)).epsilon(1e-8));
}

TEST_CASE("analysis needs no model and matches the library on the same records") {
  Workspace ws("external");
  const auto suite = synlm::psych::load_suite(std::string(SYNLM_DATA_DIR) + "/suites/wh_demo.json");
  synlm::psych::RecordTable table;
  double x = 0.3;
  for (const auto& item : suite.items) {
    for (const auto& c : suite.conditions) {
      std::size_t idx = 0;
      for (const auto& r : item.conditions.at(c.name)) {
        for (const auto& tok : r.tokens) {
          x = std::fmod(x * 7.31 + 0.17, 5.0);
          table.records.push_back({suite.name, item.id, c.name, r.name, idx++, tok, x, "thirdparty"});
        }
      }
    }
  }
  // Written by hand without any provenance header.
  std::ostringstream tsv;
  synlm::psych::write_records(tsv, table);
  spit(ws / "ext.tsv", data_section(tsv.str()));
  REQUIRE(synlm_run({"analyze", "--records", ws / "ext.tsv", "--suite", "suites/wh_demo.json", "--shuffles", "500",
                     "--out", ws / "a.json"})
              .code == 0);
  synlm::psych::AnalysisOptions opt;
  opt.shuffles = 500;
  const auto reread = synlm::psych::read_records_file(ws / "ext.tsv");
  const json direct = synlm::psych::analyze_suite(reread, suite, "thirdparty", opt);
  CHECK(load_json(ws / "a.json").at("results").at(0) == direct);
}

TEST_CASE("structured models: score, verify-beam and report") {
  Workspace ws("pipeline");
  REQUIRE(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "120", "--out", ws / "p"}).code ==
          0);
  REQUIRE(synlm_run(cat({"train", "--data", ws / "p", "--arch", "rnng", "--epochs", "1", "--out", ws / "rnng.ckpt",
                         "--log", ws / "log.tsv"},
                        kTinyModel))
              .code == 0);
  CHECK(slurp(ws / "log.tsv").rfind("epoch\ttrain_ppl", 0) == 0);
  const std::vector<std::string> score{"score", "--model", ws / "rnng.ckpt", "--suite", "suites/wh_demo.json",
                                       "--action-beam", "20", "--word-beam", "5"};
  REQUIRE(synlm_run(cat(score, {"--out", ws / "r1.tsv"})).code == 0);
  REQUIRE(synlm_run(cat(score, {"--workers", "3", "--out", ws / "r3.tsv"})).code == 0);
  CHECK(data_section(slurp(ws / "r1.tsv")) == data_section(slurp(ws / "r3.tsv")));
  const std::string first = slurp(ws / "r1.tsv");
  REQUIRE(synlm_run(cat(score, {"--out", ws / "r1.tsv"})).code == 0);
  CHECK(slurp(ws / "r1.tsv") == first);

  const auto vb = synlm_run({"verify-beam", "--model", ws / "rnng.ckpt", "--gold", ws / "p/dev.oracle", "--limit", "4"});
  REQUIRE(vb.code == 0);
  const json summary = json::parse(vb.out);
  CHECK(summary.at("sentences") == 4);
  CHECK(summary.at("words").get<int>() > 0);
  CHECK(summary.at("gold_on_beam_rate").get<double>() <= 1.0);
  const auto vb_trees = synlm_run({"verify-beam", "--model", ws / "rnng.ckpt", "--gold", ws / "p/dev.trees", "--limit",
                                   "4"});
  CHECK(json::parse(vb_trees.out).at("words") == summary.at("words"));

  REQUIRE(synlm_run({"analyze", "--records", ws / "r1.tsv", "--suite", "suites/wh_demo.json", "--shuffles", "100",
                     "--out", ws / "a.json"})
              .code == 0);
  REQUIRE(synlm_run({"report", "--analysis", ws / "a.json", "--out", ws / "rep"}).code == 0);
  const std::string svg = slurp(ws / "rep/wh_demo.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("*that_gap") != std::string::npos);
  CHECK(svg.find("provenance") != std::string::npos);
  // Each bar's value appears in the table.
  const std::string table = slurp(ws / "rep/wh_demo.tsv");
  for (const auto& c : load_json(ws / "a.json").at("results").at(0).at("conditions")) {
    CHECK(table.find(synlm::psych::format_number(c.at("mean").get<double>())) != std::string::npos);
  }
  CHECK(table.find("effect\twh_demo\trnng\tinteraction") != std::string::npos);
}

TEST_CASE("provenance and numerical failures map to exit codes") {
  Workspace ws("errors");
  REQUIRE(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "100", "--out", ws / "p"}).code ==
          0);
  REQUIRE(synlm_run(cat({"train", "--data", ws / "p", "--arch", "lstm-lm", "--epochs", "0", "--out", ws / "m.ckpt"},
                        kTinyModel))
              .code == 0);

  // A checkpoint whose vocabulary no longer matches its recorded hash.
  std::string bytes = slurp(ws / "m.ckpt");
  const auto pos = bytes.find("\"yesterday\"");
  REQUIRE(pos != std::string::npos);
  bytes[pos + 1] = 'Y';
  spit(ws / "bad.ckpt", bytes);
  const auto mismatch = synlm_run({"score", "--model", ws / "bad.ckpt", "--suite", "suites/wh_demo.json", "--out",
                                   ws / "r.tsv"});
  CHECK(mismatch.code == synlm::cli::kDataError);
  CHECK(mismatch.err.find("recorded") != std::string::npos);
  CHECK(mismatch.err.find("computed") != std::string::npos);

  // Prepared files edited after the manifest was written.
  spit(ws / "p/vocab.txt", slurp(ws / "p/vocab.txt") + "extra\n");
  const auto stale = synlm_run({"train", "--data", ws / "p", "--out", ws / "m2.ckpt"});
  CHECK(stale.code == synlm::cli::kDataError);
  CHECK(stale.err.find("manifest") != std::string::npos);

  REQUIRE(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "100", "--out", ws / "p"}).code ==
          0);
  const auto diverged = synlm_run(cat({"train", "--data", ws / "p", "--arch", "lstm-lm", "--epochs", "3", "--lr", "1000",
                                       "--clip", "0", "--init-range", "1", "--out", ws / "d.ckpt"},
                                      kTinyModel));
  CHECK(diverged.code == synlm::cli::kNumericalError);
  CHECK(fs::exists(ws / "d.ckpt"));

  CHECK(synlm_run({"verify-beam", "--model", ws / "m.ckpt", "--gold", ws / "p/dev.oracle"}).code ==
        synlm::cli::kUsage);
  CHECK(synlm_run({"analyze", "--records", ws / "missing.tsv", "--suite", "suites/wh_demo.json"}).code ==
        synlm::cli::kDataError);
}

TEST_CASE("count-deps tallies the synthetic corpus") {
  Workspace ws("deps");
  REQUIRE(synlm_run({"prepare", "--grammar", "grammars/filler_gap.pcfg", "--sentences", "300", "--out", ws / "p"}).code ==
          0);
  const auto r = synlm_run({"count-deps", "--treebank", ws / "p/raw.trees"});
  REQUIRE(r.code == 0);
  const std::string raw = slurp(ws / "p/raw.trees");
  std::size_t wh = 0;
  for (auto p = raw.find("(WHNP-1"); p != std::string::npos; p = raw.find("(WHNP-1", p + 1)) ++wh;
  std::istringstream rows(r.out);
  std::string header, all;
  std::getline(rows, header);
  std::getline(rows, all);
  CHECK(header.find("'who'") != std::string::npos);
  CHECK(all.rfind("All Positions\t" + std::to_string(wh) + "\t", 0) == 0);
  CHECK(r.out.find("Indirect Object Position\t0") != std::string::npos);
}

}
