// End-to-end checks of the fdfuse binary: flag surface, exit codes, dumps,
// compare/bench/plot subcommands, transports, process launch. Talks to the
// driver the way a user would — through a shell — and never links the core.
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/fdfuse-cli.XXXXXX";
    REQUIRE(mkdtemp(tmpl) != nullptr);
    path = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

TempDir& tmp() {
  static TempDir t;
  return t;
}

struct CliOut {
  int code = -1;
  std::string out;
  std::string err;
};

CliOut cli(const std::string& args, const std::string& env = "") {
  static int seqNo = 0;
  std::string base = tmp().file("io" + std::to_string(seqNo++));
  std::string cmd = (env.empty() ? std::string() : "env " + env + " ") +
                    FDFUSE_BIN_PATH " " + args + " >" + base + ".out 2>" +
                    base + ".err";
  int rc = std::system(cmd.c_str());
  CliOut r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = read_file(base + ".out");
  r.err = read_file(base + ".err");
  return r;
}

std::string spec(const char* name) {
  return std::string(FDFUSE_SPEC_DIR "/") + name;
}

std::string golden(const char* name) {
  return read_file(std::string(FDFUSE_GOLDEN_DIR "/") + name);
}

std::string write_spec(const char* name, const std::string& text) {
  std::string path = tmp().file(name);
  std::ofstream(path) << text;
  return path;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("top-level help matches golden and exits 0") {
  CliOut r = cli("--help");
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  CHECK(r.out == golden("help_main.txt"));
  // every subcommand advertised
  for (const char* sub :
       {"run", "validate", "listing", "print", "compare", "bench",
        "plot-csv"})
    CHECK(r.out.find(sub) != std::string::npos);
  CHECK(r.out.find("FDFUSE_TRANSPORT") != std::string::npos);
}

TEST_CASE("run help lists the full flag surface") {
  CliOut r = cli("run --help");
  CHECK(r.code == 0);
  CHECK(r.out == golden("help_run.txt"));
  for (const char* flag :
       {"--spec", "--mode", "--threads", "--ranks", "--alignment",
        "--vector-size", "--l3-size", "--comm-blocks", "--steps-override",
        "--dump", "--trace", "--check-finite", "--compare", "--tol",
        "--metrics", "--dump-every", "--rank-grid", "--window-steps",
        "--launch"})
    CHECK(r.out.find(flag) != std::string::npos);
  // launcher plumbing stays hidden
  CHECK(r.out.find("--internal-rank") == std::string::npos);
  CHECK(r.out.find("--internal-socket-dir") == std::string::npos);
}

TEST_CASE("usage errors exit 2 with help text") {
  CliOut bare = cli("");
  CHECK(bare.code == 2);
  CHECK(bare.err.find("error:") != std::string::npos);

  CliOut noSpec = cli("run");
  CHECK(noSpec.code == 2);
  CHECK(noSpec.err.find("error:") != std::string::npos);
  CHECK(noSpec.err.find("--spec") != std::string::npos);

  CliOut badSub = cli("frobnicate");
  CHECK(badSub.code == 2);

  std::string h = spec("heat1d.fd");
  CHECK(cli("run --spec " + h + " --mode seq --ranks 2").code == 2);
  CHECK(cli("run --spec " + h + " --mode seq --threads 4").code == 2);
  CHECK(cli("run --spec " + h + " --mode warp9").code == 2);
  CHECK(cli("run --spec " + h + " --trace /tmp/t.txt").code == 2);
  CHECK(cli("run --spec " + h + " --launch boat").code == 2);
  CHECK(cli("run --spec " + h + " --launch proc").code == 2);
  CHECK(cli("run --spec " + h + " --mode dist-pure --ranks 2",
            "FDFUSE_TRANSPORT=carrier-pigeon")
            .code == 2);
}

TEST_CASE("data and IO failures exit 1") {
  CHECK(cli("run --spec /nonexistent/no.fd").code == 1);
  CHECK(cli("compare /nonexistent/a.dump /nonexistent/b.dump").code == 1);

  std::string unstable = write_spec("unstable.fd",
                                    "mesh 1d nx=32 lx=1.0\n"
                                    "field T scalar\n"
                                    "const D = 1.0\n"
                                    "time dt=0.25 steps=400\n"
                                    "numerics acc=2\n"
                                    "eq dt(T) = D * lapla(T)\n"
                                    "init T = sin(2*pi*x)\n"
                                    "bc T periodic on all\n");
  CliOut blowup = cli("run --spec " + unstable + " --check-finite");
  CHECK(blowup.code == 1);
  CHECK(blowup.err.find("error:") != std::string::npos);
}

TEST_CASE("run writes a dump and prints metrics") {
  std::string d = tmp().file("seq.dump");
  CliOut r = cli("run --spec " + spec("heat1d.fd") + " --dump " + d +
                 " --metrics -");
  CHECK(r.code == 0);
  CHECK(r.out.find("run metrics") != std::string::npos);
  CHECK(r.out.find("Mpoints/s") != std::string::npos);
  CHECK(r.out.find("mode=seq") != std::string::npos);
  CHECK(r.out.find("steps=200") != std::string::npos);
  std::string dump = read_file(d);
  CHECK(dump.rfind("field T dims=1 nx=64 ny=1 nz=1 step=200", 0) == 0);
}

TEST_CASE("modes agree byte-for-byte through the CLI") {
  std::string h = spec("heat1d.fd");
  std::string dSeq = tmp().file("m_seq.dump");
  std::string dTask = tmp().file("m_task.dump");
  std::string dFj = tmp().file("m_fj.dump");
  CHECK(cli("run --spec " + h + " --dump " + dSeq).code == 0);
  CHECK(cli("run --spec " + h + " --mode task --threads 4 --dump " + dTask)
            .code == 0);
  CHECK(cli("run --spec " + h + " --mode forkjoin --threads 2 --dump " + dFj)
            .code == 0);
  std::string ref = read_file(dSeq);
  CHECK(ref == read_file(dTask));
  CHECK(ref == read_file(dFj));

  CliOut cmp = cli("compare " + dSeq + " " + dTask);
  CHECK(cmp.code == 0);
  CHECK(cmp.out.rfind("PASS values=64", 0) == 0);

  // same mesh, different step count: values differ, compare fails
  std::string dShort = tmp().file("m_short.dump");
  CHECK(cli("run --spec " + h + " --steps-override 100 --dump " + dShort)
            .code == 0);
  CliOut bad = cli("compare " + dSeq + " " + dShort);
  CHECK(bad.code == 1);
  CHECK(bad.out.rfind("FAIL", 0) == 0);
  CHECK(bad.out.find("first_mismatch=T[") != std::string::npos);
  // a loose tolerance turns the same diff into a pass
  CHECK(cli("compare " + dSeq + " " + dShort + " --tol 1.0").code == 0);

  // in-run comparison against a reference dump
  CHECK(cli("run --spec " + h + " --mode task --threads 2 --compare " + dSeq)
            .code == 0);
  CliOut inRun =
      cli("run --spec " + h + " --steps-override 100 --compare " + dSeq);
  CHECK(inRun.code == 1);
  CHECK(inRun.out.find("FAIL") != std::string::npos);
}

TEST_CASE("task trace lands in the requested file") {
  std::string tr = tmp().file("run.trace");
  CliOut r = cli("run --spec " + spec("heat1d.fd") +
                 " --mode task --threads 2 --steps-override 3 --trace " + tr);
  CHECK(r.code == 0);
  std::string text = read_file(tr);
  REQUIRE(!text.empty());
  CHECK((text[0] == 'A' || text[0] == 'B'));
  CHECK(text.find(" lane=") != std::string::npos);
  CHECK(text.find(" block=") != std::string::npos);
  CHECK(text.find(" step=") != std::string::npos);
}

TEST_CASE("dump-every writes cadence files") {
  std::string d = tmp().file("cad.dump");
  CliOut r = cli("run --spec " + spec("heat1d.fd") +
                 " --steps-override 5 --dump-every 2 --dump " + d);
  CHECK(r.code == 0);
  CHECK(fs::exists(d));
  CHECK(fs::exists(d + ".step2"));
  CHECK(fs::exists(d + ".step4"));
  CHECK_FALSE(fs::exists(d + ".step5"));
  CHECK(read_file(d + ".step2").find("step=2") != std::string::npos);
}

TEST_CASE("validate reports ok and invalid") {
  CliOut good = cli("validate --spec " + spec("heat1d.fd"));
  CHECK(good.code == 0);
  CHECK(good.out == "ok\n");

  std::string dup = write_spec("dup.fd",
                               "mesh 1d nx=16 lx=1.0\n"
                               "field T scalar\n"
                               "time dt=0.0001 steps=1\n"
                               "numerics acc=2\n"
                               "eq dt(T) = lapla(T)\n"
                               "eq dt(T) = lapla(T)\n"
                               "init T = sin(2*pi*x)\n"
                               "bc T periodic on all\n");
  CliOut bad = cli("validate --spec " + dup);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("duplicate left-hand side") != std::string::npos);
  CHECK(bad.out.find("invalid\n") != std::string::npos);
}

TEST_CASE("listing and print match goldens") {
  CliOut lst = cli("listing --spec " + spec("heat1d.fd"));
  CHECK(lst.code == 0);
  CHECK(lst.out == golden("listing_heat1d.txt"));
  CHECK(lst.out.find("program time") != std::string::npos);
  CHECK(lst.out.find("cost mem_per_point=") != std::string::npos);

  CliOut prt = cli("print --spec " + spec("heat1d.fd"));
  CHECK(prt.code == 0);
  CHECK(prt.out == golden("print_heat1d.txt"));
  CHECK(prt.out.rfind("mesh 1d nx=64 lx=1", 0) == 0);
}

TEST_CASE("bench reports both runs and the speedup") {
  CliOut r = cli("bench --spec " + spec("heat1d.fd") + " --steps-override 20");
  CHECK(r.code == 0);
  for (const char* key : {"baseline_s=", "optimized_s=", "baseline_mpoints_s=",
                          "optimized_mpoints_s=", "speedup="})
    CHECK(r.out.find(key) != std::string::npos);
}

TEST_CASE("plot-csv emits index-coordinate slices") {
  CliOut flat = cli("plot-csv --spec " + spec("heat1d.fd") +
                    " --steps-override 0");
  CHECK(flat.code == 0);
  CHECK(flat.out.rfind("i,T\n", 0) == 0);
  CHECK(count_lines(flat.out) == 65);  // header + 64 interior points

  std::string csv = tmp().file("slice.csv");
  std::string cube = write_spec("cube.fd",
                                "mesh 3d nx=6 ny=5 nz=4 lx=1.0 ly=1.0 lz=1.0\n"
                                "field T scalar\n"
                                "const D = 0.001\n"
                                "time dt=0.0001 steps=2\n"
                                "numerics acc=2\n"
                                "eq dt(T) = D * lapla(T)\n"
                                "init T = sin(2*pi*x)*cos(2*pi*y)\n"
                                "bc T periodic on all\n");
  CliOut sl = cli("plot-csv --spec " + cube + " --k 2 --out " + csv);
  CHECK(sl.code == 0);
  std::string body = read_file(csv);
  CHECK(body.rfind("i,j,T\n", 0) == 0);
  CHECK(count_lines(body) == 31);  // header + 6*5 points

  CHECK(cli("plot-csv --spec " + cube + " --k 9").code == 2);
  CHECK(cli("plot-csv --spec " + cube + " --field ghost").code == 2);
}

TEST_CASE("dist runs agree across transports and the process launcher") {
  std::string h = spec("heat1d.fd");
  std::string dSeq = tmp().file("d_seq.dump");
  std::string dIn = tmp().file("d_inproc.dump");
  std::string dSock = tmp().file("d_socket.dump");
  std::string dProc = tmp().file("d_proc.dump");
  CHECK(cli("run --spec " + h + " --steps-override 20 --dump " + dSeq).code ==
        0);
  CHECK(cli("run --spec " + h +
            " --mode dist-pure --ranks 2 --steps-override 20 --dump " + dIn)
            .code == 0);
  CHECK(cli("run --spec " + h +
            " --mode dist-pure --ranks 2 --steps-override 20 --dump " + dSock,
            "FDFUSE_TRANSPORT=socket")
            .code == 0);
  CHECK(cli("run --spec " + h +
            " --mode dist-task --ranks 2 --threads 2 --launch proc "
            "--steps-override 20 --dump " +
            dProc)
            .code == 0);
  std::string ref = read_file(dSeq);
  REQUIRE(!ref.empty());
  CHECK(ref == read_file(dIn));
  CHECK(ref == read_file(dSock));
  CHECK(ref == read_file(dProc));
}
