#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBinary = PREDICTORLAB_CLI;
const std::string kConfigs = PREDICTORLAB_CONFIG_DIR;

struct Result {
    int code;
    std::string out;
};

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("predictorlab_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Result run(const std::string& args, const std::string& env = "") {
    const fs::path out = scratch() / "stdout.txt";
    const std::string cmd = env + " " + kBinary + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out)};
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

std::string cfg(const std::string& name) { return "--config " + kConfigs + "/" + name; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate the worked example") {
    const fs::path csv = scratch() / "nominal.csv";
    const Result r = run("simulate " + cfg("example4.toml") + " --out " + csv.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("decay rate 1.4") != std::string::npos);
    CHECK(r.out.find("j_bar 28") != std::string::npos);
    const std::string text = slurp(csv);
    CHECK(text.rfind("t,x1,x2,z1,z2,w,u,y,d,xi,m24,m214,m223,m224\r\n", 0) == 0);

    // Overwrite, never append; same bytes on a rerun.
    CHECK(run("simulate " + cfg("example4.toml") + " --out " + csv.string()).code == 0);
    CHECK(slurp(csv) == text);
}

TEST_CASE("simulate with overrides and seeds") {
    const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv", c = scratch() / "c.csv";
    const std::string common = "simulate " + cfg("example4_jitter.toml") + " --t-end 2 --h 0.0005 --seed 3 --out ";
    CHECK(run(common + a.string()).code == 0);
    CHECK(run(common + b.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(run("simulate " + cfg("example4_jitter.toml") + " --t-end 2 --h 0.0005 --seed 4 --out " + c.string()).code ==
          0);
    CHECK(slurp(a) != slurp(c));
    // 2 s at h = 5e-4 plus event rows.
    std::size_t lines = 0;
    for (char ch : slurp(a)) lines += ch == '\n';
    CHECK(lines > 4000);
}

TEST_CASE("config errors exit 2 without output") {
    const fs::path bad = write("bad.toml", "plant = \"example4\"\n[gains]\nk = [1.0\n");
    const fs::path out = scratch() / "never.csv";
    fs::remove(out);
    CHECK(run("simulate --config " + bad.string() + " --out " + out.string()).code == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(run("simulate --config " + (scratch() / "missing.toml").string()).code == 2);
    CHECK(run("simulate").code == 2);
    CHECK(run("simulate " + cfg("example4.toml") + " --bogus").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("simulate " + cfg("example4.toml") + " --h -1").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("divergence exits 4 and keeps the partial trace") {
    const std::string text = slurp(kConfigs + "/example4.toml");
    std::string t = text;
    t.replace(t.find("T1 = 0.03"), 9, "T1 = 1.0");
    t.replace(t.find("T2 = 0.01"), 9, "T2 = 1.0");
    const fs::path p = write("diverge.toml", t);
    const fs::path out = scratch() / "diverge.csv";
    CHECK(run("simulate --config " + p.string() + " --out " + out.string()).code == 4);
    CHECK(fs::exists(out));
    CHECK(fs::file_size(out) > 100);
}

TEST_CASE("check") {
    CHECK(run("check " + cfg("example4.toml")).code == 0);
    const Result strict = run("check " + cfg("example4.toml") + " --strict");
    CHECK(strict.code == 3);
    CHECK(strict.out.find("predictor-accuracy") != std::string::npos);
    CHECK(strict.out.find("tier i") != std::string::npos);
    const Result lim = run("check " + cfg("limit.toml") + " --strict");
    CHECK(lim.code == 0);
    CHECK(lim.out.find("all design conditions pass") != std::string::npos);
    CHECK(run("check " + cfg("lti.toml") + " --strict").code == 0);
    const fs::path rep = scratch() / "report.csv";
    CHECK(run("check " + cfg("example4.toml") + " --out " + rep.string()).code == 0);
    CHECK(slurp(rep).rfind("id,lhs,rhs,margin,pass,note\r\n", 0) == 0);
}

TEST_CASE("predict") {
    const Result r = run("predict " + cfg("example4.toml") + " --state 1,1");
    CHECK(r.code == 0);
    CHECK(r.out == "1.8438710667803559\n0\n");
    CHECK(run("predict " + cfg("example4.toml") + " --exact").code == 2);
    CHECK(run("predict " + cfg("lti.toml") + " --state 0.5,0.5").code == 0);

    std::string zero = slurp(kConfigs + "/example4.toml");
    zero.replace(zero.find("u0 = -2.0"), 9, "u0 = 0.0");
    const fs::path z = write("zero.toml", zero);
    CHECK(run("predict --config " + z.string() + " --state 0,0").out == "0\n0\n");

    std::string m1 = slurp(kConfigs + "/example4.toml");
    m1.replace(m1.find("m = 2"), 5, "m = 1");
    CHECK(run("predict --config " + write("m1.toml", m1).string()).code == 3);
}

TEST_CASE("sweep") {
    const fs::path a = scratch() / "sweep_a.csv", b = scratch() / "sweep_b.csv";
    const Result r = run("sweep " + cfg("sweep_single.toml") + " --out " + a.string());
    CHECK(r.code == 0);
    const std::string text = slurp(a);
    CHECK(text.rfind("T2,success,diverged,", 0) == 0);
    CHECK(text.find("\r\n0.01,1,0,") != std::string::npos);
    CHECK(run("sweep " + cfg("sweep_single.toml") + " --out " + b.string(), "PREDICTORLAB_THREADS=1").code == 0);
    CHECK(slurp(b) == text);

    std::string empty = slurp(kConfigs + "/sweep_single.toml");
    empty = empty.substr(0, empty.find("[[sweep.axis]]"));
    CHECK(run("sweep --config " + write("empty_axes.toml", empty).string()).code == 2);
    CHECK(run("sweep " + cfg("example4.toml")).code == 2);
}

TEST_CASE("config-dump round trip") {
    const Result a = run("config-dump " + cfg("example4_forced.toml"));
    CHECK(a.code == 0);
    const fs::path p = write("dumped.toml", a.out);
    const Result b = run("config-dump --config " + p.string());
    CHECK(b.out == a.out);
}

TEST_CASE("estimate-k") {
    const Result r = run("estimate-k " + cfg("example4.toml") + " --trials 50");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("k_hat 0.0367125298195", 0) == 0);
    CHECK(r.out.find("l=6 ") != std::string::npos);
}

}
