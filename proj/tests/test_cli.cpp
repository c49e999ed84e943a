#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

// Runs the CLI through the shell, capturing stdout and stderr together.
Result cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" + MTCF_CLI_PATH + "' " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path work_dir() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / "mtcf_test_cli";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

std::string write(const std::string& name, const std::string& text) {
    const auto path = work_dir() / name;
    std::ofstream(path, std::ios::binary) << text;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string q(const std::string& s) { return "'" + s + "'"; }

constexpr const char* kMc = R"({
  "system": {"omega": 2.0, "coupling": "sigma_z", "psi0": [[1, 2], [1, 1]]},
  "bath": {"modes": [{"g": 1.0, "omega": 6.0}, {"g": 1.0, "omega": 2.0}]},
  "observables": ["sigma_x", "sigma_z"],
  "times": {"t": 0.0, "t_prime_start": 0.0, "t_prime_end": 0.5, "step": 0.25},
  "method": {"mc": {"n_traj": 100, "seed": 11, "dt": 0.001}}
})";

constexpr const char* kNoBath = R"({
  "system": {"omega": 2.0, "coupling": "sigma_z", "psi0": [1, 0]},
  "observables": ["sigma_z"],
  "times": {"t": 0.0, "t_prime": [0.0]},
  "method": {"oracle": {}}
})";

}  // namespace

TEST_CASE("version and usage") {
    const auto v = cli("--version");
    CHECK(v.code == 0);
    CHECK(v.out.rfind("mtcf ", 0) == 0);
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("compare a.csv").code == 2);
}

TEST_CASE("run exit codes") {
    const auto missing_bath = cli("run " + q(write("nobath.json", kNoBath)) + " --out " + q((work_dir() / "x.csv").string()));
    CHECK(missing_bath.code == 2);
    CHECK(missing_bath.out.find("bath") != std::string::npos);

    CHECK(cli("run " + q((work_dir() / "absent.json").string())).code == 2);
    CHECK(cli("run " + q(write("syntax.json", "{ \"system\": "))).code == 2);
    // No output path in the file and none on the command line.
    CHECK(cli("run " + q(write("noout.json", kMc))).code == 2);
    // Output directory does not exist.
    CHECK(cli("run " + q(write("mc.json", kMc)) + " --out " + q((work_dir() / "no/such/dir.csv").string())).code == 1);
}

TEST_CASE("preset command writes a runnable scenario once omega is set") {
    const std::string path = (work_dir() / "fig1a-exact.json").string();
    CHECK(cli("preset fig1a-exact --out " + q(path)).code == 0);
    const auto first = cli("run " + q(path) + " --out " + q((work_dir() / "f.csv").string()));
    CHECK(first.code == 2);
    CHECK(first.out.find("system.omega") != std::string::npos);

    std::string text = slurp(path);
    const std::string placeholder = "\"REQUIRED-USER-INPUT\"";
    text.replace(text.find(placeholder), placeholder.size(), "2.0");
    const std::string fixed = write("fig1a-exact-w2.json", text);
    const std::string csv = (work_dir() / "fig1a-exact.csv").string();
    CHECK(cli("run " + q(fixed) + " --out " + q(csv)).code == 0);
    const std::string out = slurp(csv);
    CHECK(out.find("t,t_prime,re,im,stderr_re,stderr_im\n") != std::string::npos);
    CHECK(out.find("# method: exact_dephasing") != std::string::npos);

    CHECK(cli("preset nope --out -").code == 2);
    const auto listed = cli("preset fig2 --out -");
    CHECK(listed.code == 0);
    CHECK(listed.out.find("\"fourier\"") != std::string::npos);
}

TEST_CASE("same seed gives byte-identical CSV across runs and thread counts") {
    const std::string cfg = write("mc.json", kMc);
    const std::string a = (work_dir() / "a.csv").string();
    const std::string b = (work_dir() / "b.csv").string();
    const std::string c = (work_dir() / "c.csv").string();
    REQUIRE(cli("run " + q(cfg) + " --threads 1 --out " + q(a)).code == 0);
    REQUIRE(cli("run " + q(cfg) + " --threads 4 --out " + q(b)).code == 0);
    REQUIRE(cli("run " + q(cfg) + " --threads 1 --out " + q(c), "MTCF_SEED=12").code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    CHECK(slurp(c).find("# seed: 12\n") != std::string::npos);
    CHECK(cli("run " + q(cfg) + " --out " + q(c), "MTCF_SEED=-3").code == 2);
    CHECK(cli("run " + q(cfg) + " --out " + q(c), "MTCF_SEED=abc").code == 2);
}

TEST_CASE("compare exit codes") {
    const std::string cfg = write("mc.json", kMc);
    const std::string a = (work_dir() / "cmp_a.csv").string();
    const std::string b = (work_dir() / "cmp_b.csv").string();
    REQUIRE(cli("run " + q(cfg) + " --out " + q(a)).code == 0);
    REQUIRE(cli("run " + q(cfg) + " --out " + q(b), "MTCF_SEED=99").code == 0);

    const auto self = cli("compare " + q(a) + " " + q(a) + " --tol 0");
    CHECK(self.code == 0);
    CHECK(self.out.find("max_abs_diff: 0\n") != std::string::npos);

    const std::string report = (work_dir() / "report.csv").string();
    CHECK(cli("compare " + q(a) + " " + q(b) + " --tol 0 --report " + q(report)).code == 1);
    CHECK(slurp(report).rfind("t,t_prime,abs_diff,stderr\n", 0) == 0);
    CHECK(cli("compare " + q(a) + " " + q(b) + " --tol 100").code == 0);

    std::string shifted = slurp(a);
    shifted.replace(shifted.rfind("0.5,"), 4, "0.6,");
    const std::string c = write("shifted.csv", shifted);
    CHECK(cli("compare " + q(a) + " " + q(c) + " --tol 1").code == 2);
    CHECK(cli("compare " + q(a) + " " + q((work_dir() / "absent.csv").string()) + " --tol 1").code == 2);
    CHECK(cli("compare " + q(a) + " " + q(a) + " --tol -1").code == 2);
}

TEST_CASE("dephasing full and truncated evolution agree, the dissipative ones do not") {
    auto run_preset = [&](const std::string& name) {
        const std::string cfg = (work_dir() / (name + ".json")).string();
        const std::string out = (work_dir() / (name + ".csv")).string();
        REQUIRE(cli("preset " + name + " --out " + q(cfg)).code == 0);
        REQUIRE(cli("run " + q(cfg) + " --out " + q(out)).code == 0);
        return out;
    };
    // fig1b-qrt is the dephasing sigma_x/sigma_y case; swap the observables for sigma_x/sigma_z.
    const std::string path = (work_dir() / "deph.json").string();
    REQUIRE(cli("preset fig1b-qrt --out " + q(path)).code == 0);
    std::string text = slurp(path);
    text.replace(text.find("\"sigma_y\""), 9, "\"sigma_z\"");
    text.replace(text.find("\"REQUIRED-USER-INPUT\""), 21, "2.0");
    const std::string qrt_cfg = write("deph_qrt.json", text);
    std::string full_text = text;
    full_text.replace(full_text.find("\"qrt_truncated\""), 15, "\"full\"");
    const std::string full_cfg = write("deph_full.json", full_text);
    const std::string qrt_csv = (work_dir() / "deph_qrt.csv").string();
    const std::string full_csv = (work_dir() / "deph_full.csv").string();
    REQUIRE(cli("run " + q(qrt_cfg) + " --out " + q(qrt_csv)).code == 0);
    REQUIRE(cli("run " + q(full_cfg) + " --out " + q(full_csv)).code == 0);
    CHECK(cli("compare " + q(full_csv) + " " + q(qrt_csv) + " --tol 1e-8").code == 0);

    const std::string f3 = run_preset("fig3");
    const std::string f3q = run_preset("fig3-qrt");
    CHECK(cli("compare " + q(f3) + " " + q(f3q) + " --tol 1e-4").code == 1);
}
