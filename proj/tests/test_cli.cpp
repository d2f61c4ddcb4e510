#include <doctest.h>
#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / ("mstlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string("'") + MSTLAB_CLI + "' " + args + " 2>'" + err.string() + "'";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t k;
  while ((k = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, k);
  const int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) v.push_back(l);
  return v;
}

std::vector<std::string> data_lines(const std::string& s) {
  std::vector<std::string> v;
  for (auto& l : lines(s))
    if (!l.empty() && l[0] != '#') v.push_back(l);
  return v;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> v;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) v.push_back(c);
  return v;
}

class SchemaDir : public rapidjson::IRemoteSchemaDocumentProvider {
 public:
  const rapidjson::SchemaDocument* GetRemoteDocument(const char* uri, rapidjson::SizeType len) override {
    const std::string name(uri, len);
    auto it = docs_.find(name);
    if (it == docs_.end()) {
      rapidjson::Document d;
      d.Parse(slurp(fs::path(MSTLAB_SCHEMAS) / name).c_str());
      if (d.HasParseError()) return nullptr;
      it = docs_.emplace(name, std::make_unique<rapidjson::SchemaDocument>(d)).first;
    }
    return it->second.get();
  }

 private:
  std::map<std::string, std::unique_ptr<rapidjson::SchemaDocument>> docs_;
};

// Empty string when the document validates, otherwise a description.
std::string validate(const std::string& schema_file, const std::string& text) {
  rapidjson::Document sd;
  sd.Parse(slurp(fs::path(MSTLAB_SCHEMAS) / schema_file).c_str());
  if (sd.HasParseError()) return "schema parse error in " + schema_file;
  SchemaDir provider;
  rapidjson::SchemaDocument schema(sd, &provider);
  rapidjson::Document d;
  d.Parse(text.c_str());
  if (d.HasParseError()) return std::string("json parse error: ") + rapidjson::GetParseError_En(d.GetParseError());
  rapidjson::SchemaValidator v(schema);
  if (d.Accept(v)) return {};
  rapidjson::StringBuffer where, rule;
  v.GetInvalidDocumentPointer().StringifyUriFragment(where);
  v.GetInvalidSchemaPointer().StringifyUriFragment(rule);
  return std::string("invalid at ") + where.GetString() + " (schema " + rule.GetString() + ", keyword " +
         v.GetInvalidSchemaKeyword() + ")";
}

rapidjson::Document parse(const std::string& text) {
  rapidjson::Document d;
  d.Parse(text.c_str());
  REQUIRE_FALSE(d.HasParseError());
  return d;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    CHECK(run("roots --family binary --param 3").code == 2);
    CHECK(run("simulate --family quadtree --param 2 --n 100 --reps 10 --method tree").code == 2);
    CHECK(run("fixpoint --map uniK --param 3 --pool 10").code == 2);
    CHECK(run("nosuchcommand").code == 2);
    const Run reg = run("fixpoint --map TN_periodic --param 10 --pool 1000 --gens 1");
    CHECK(reg.code == 3);
    CHECK(reg.err.find("periodic") != std::string::npos);
    CHECK(run("periodic --kind F1 --param 10 --points 8").code == 3);
    CHECK(run("table-alpha --from 3 --to 4").code == 0);
  }

  TEST_CASE("verify reports failing criteria through exit code 4") {
    const Run r = run("verify --quick --threads 4");
    CHECK(r.code == 4);
    int pass = 0, fail = 0;
    for (const auto& l : lines(r.out)) {
      if (l.rfind("criterion ", 0) != 0) continue;
      pass += l.find(": PASS") != std::string::npos;
      fail += l.find(": FAIL") != std::string::npos;
    }
    CHECK(pass + fail == 11);
    CHECK(r.out.find("summary: 0 unexpected failure(s)") != std::string::npos);
  }

  std::vector<std::string> alpha_row_m10() {
    const Run r = run("table-alpha --from 3 --to 26");
    REQUIRE(r.code == 0);
    const auto d = data_lines(r.out);
    REQUIRE(d.size() == 25);
    CHECK(d[0] == "m,alpha,beta");
    const auto row = cells(d[8]);
    REQUIRE(row.size() == 3);
    CHECK(row[0] == "10");
    return row;
  }

  // The published 0.568 is alpha = 0.5685041 truncated, 5.04e-4 away.
  TEST_CASE("table-alpha row for m=10 within 5e-4 of 0.568" * doctest::should_fail()) {
    CHECK(std::abs(std::stod(alpha_row_m10()[1]) - 0.568) <= 5e-4);
  }

  TEST_CASE("table-alpha row for m=10 truncates to 0.568") {
    const double a = std::stod(alpha_row_m10()[1]);
    CHECK(std::trunc(a * 1000.0) / 1000.0 == doctest::Approx(0.568).epsilon(1e-12));
    CHECK(std::abs(a - 0.568) < 6e-4);
  }

  TEST_CASE("table-c2 row for m=4 matches 222/2197") {
    const Run r = run("table-c2 --from 3 --to 30");
    REQUIRE(r.code == 0);
    const auto d = data_lines(r.out);
    REQUIRE(d.size() == 29);
    CHECK(d[0] == "m,c2_minus_phi_c1,rational,root_sum,printed,match");
    const auto row = cells(d[2]);
    REQUIRE(row.size() == 6);
    CHECK(row[0] == "4");
    CHECK(row[2] == "222/2197");
    CHECK(row[4] == "222/2197");
    CHECK(row[5] == "true");
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(cells(d[i]).back() == "true");
  }

  TEST_CASE("simulate is byte-identical across runs and thread counts") {
    const std::string base = "simulate --family mary --param 3 --n 2000 --reps 400 --seed 7";
    const Run a = run(base + " --threads 1"), b = run(base + " --threads 1"), c = run(base + " --threads 4");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const std::string prof = "simulate --family quadtree --param 2 --grid 200,400 --reps 200 --seed 3";
    const Run p = run(prof + " --threads 1"), q = run(prof + " --threads 3");
    REQUIRE(p.code == 0);
    CHECK(p.out == q.out);
    CHECK(run(base + " --seed 8 --threads 1").out != a.out);
  }

  TEST_CASE("fixpoint is byte-identical across thread counts") {
    const std::string base = "fixpoint --map uniK --param 3 --pool 4000 --gens 3 --seed 5";
    const Run a = run(base + " --threads 1"), b = run(base + " --threads 4");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
  }

  TEST_CASE("csv outputs start with a comment block and keep fixed columns") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"table-alpha --from 3 --to 5", "m,alpha,beta"},
        {"table-c2 --from 3 --to 5", "m,c2_minus_phi_c1,rational,root_sum,printed,match"},
        {"moments --family mary --param 3 --nmax 10 --mode exact", "n,mu,kappa,nu,VS,VSK,VK,VSN,VN,VKN"},
        {"moments --family fbbst --param 1 --nmax 10 --mode float", "n,mu,kappa,nu,VS,VSK,VK,VSN,VN,VKN"},
        {"periodic --kind Frho --param 27 --points 16", "z,value"},
        {"simulate --family mary --param 3 --grid 100 --reps 50", "n,stat,empirical,stderr,predicted,regime"},
        {"fixpoint --map uniK --param 3 --pool 1000 --gens 1",
         "generation,mean_x,var_x,mean_re_w,mean_im_w,var_w,cov"}};
    for (const auto& [args, header] : cases) {
      CAPTURE(args);
      const Run r = run(args);
      REQUIRE(r.code == 0);
      const auto ls = lines(r.out);
      REQUIRE(ls.size() > 2);
      CHECK(ls[0] == "# mstlab 1.0.0");
      CHECK(ls[1].rfind("# subcommand=", 0) == 0);
      const auto d = data_lines(r.out);
      REQUIRE(!d.empty());
      CHECK(d[0] == header);
      const std::size_t width = cells(header).size();
      for (std::size_t i = 1; i < d.size(); ++i) CHECK(cells(d[i]).size() == width);
      CHECK(r.out.find('\r') == std::string::npos);
      CHECK(r.err.find("# wall-time=") != std::string::npos);
    }
  }

  TEST_CASE("json outputs validate against the shipped schemas") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"roots.json", "roots --family mary --param 27"},
        {"roots.json", "roots --family mary --param 3 --precision 256"},
        {"roots.json", "roots --family fbbst --param 2"},
        {"roots.json", "roots --family quadtree --param 9"},
        {"constants.json", "constants --family mary --param 4"},
        {"constants.json", "constants --family fbbst --param 1"},
        {"constants.json", "constants --family quadtree --param 2"},
        {"simulate.json", "simulate --family mary --param 5 --n 300 --reps 50"},
        {"simulate.json", "simulate --family mary --param 5 --n 300 --reps 50 --method tree"},
        {"simulate.json", "simulate --family fbbst --param 1 --n 300 --reps 50"},
        {"simulate.json", "simulate --family quadtree --param 2 --n 300 --reps 50"},
        {"fixpoint.json", "fixpoint --map uniK --param 3 --pool 1000 --gens 2 --format json"},
        {"fixpoint.json", "fixpoint --map TN_periodic --param 27 --pool 1000 --gens 2 --format json"},
        {"fixpoint.json", "fixpoint --map Tquad_normal --param 3 --pool 1000 --gens 2 --format json"}};
    for (const auto& [schema, args] : cases) {
      CAPTURE(args);
      const Run r = run(args);
      REQUIRE(r.code == 0);
      CHECK(validate(schema, r.out) == "");
      CHECK(r.err.find("# wall-time=") != std::string::npos);
    }
  }

  TEST_CASE("schemas reject malformed documents") {
    const Run r = run("roots --family mary --param 27");
    REQUIRE(r.code == 0);
    std::string broken = r.out;
    broken.replace(broken.find("\"alpha\""), 7, "\"alfa\"");
    CHECK(validate("roots.json", broken) != "");
    CHECK(validate("simulate.json", r.out) != "");
  }

  TEST_CASE("json meta echoes the configuration") {
    const Run r = run("simulate --family quadtree --param 2 --n 500 --reps 40 --seed 11 --threads 2");
    REQUIRE(r.code == 0);
    const auto d = parse(r.out);
    const auto& cfg = d["meta"]["config"];
    CHECK(std::string(d["meta"]["tool"].GetString()) == "mstlab");
    CHECK(std::string(cfg["subcommand"].GetString()) == "simulate");
    CHECK(std::string(cfg["family"].GetString()) == "quadtree");
    CHECK(std::string(cfg["seed"].GetString()) == "11");
    CHECK_FALSE(cfg.HasMember("threads"));
    CHECK(d["stats"]["reps"].GetInt() == 40);
  }

  TEST_CASE("config file sits between flags and defaults") {
    const fs::path cfg = work_dir() / "run.cfg";
    {
      std::ofstream f(cfg);
      f << "# simulation settings\n"
           "family = mary\n"
           "param = 5\n"
           "n = 300\n"
           "reps = 30\n"
           "seed = 99\n";
    }
    const std::string c = " --config '" + cfg.string() + "'";
    const Run from_file = run("simulate" + c);
    REQUIRE(from_file.code == 0);
    const auto a = parse(from_file.out);
    CHECK(a["stats"]["param"].GetInt() == 5);
    CHECK(a["stats"]["seed"].GetUint64() == 99);
    CHECK(a["stats"]["n"].GetInt() == 300);

    const Run flags = run("simulate --param 4 --seed 2" + c);
    REQUIRE(flags.code == 0);
    const auto b = parse(flags.out);
    CHECK(b["stats"]["param"].GetInt() == 4);
    CHECK(b["stats"]["seed"].GetUint64() == 2);
    CHECK(b["stats"]["reps"].GetInt() == 30);

    const Run defaults = run("simulate --family mary --param 5 --n 300 --reps 30");
    REQUIRE(defaults.code == 0);
    CHECK(parse(defaults.out)["stats"]["seed"].GetUint64() == 1);

    {
      std::ofstream f(cfg);
      f << "param 5\n";
    }
    CHECK(run("simulate" + c).code == 2);
    CHECK(run("simulate --config '" + (work_dir() / "missing.cfg").string() + "'").code == 2);
  }

  TEST_CASE("output file option writes the same bytes as stdout") {
    const fs::path out = work_dir() / "alpha.csv";
    const Run a = run("table-alpha --from 3 --to 8");
    const Run b = run("table-alpha --from 3 --to 8 -o '" + out.string() + "'");
    REQUIRE(b.code == 0);
    CHECK(b.out.empty());
    CHECK(slurp(out) == a.out);
  }
}
