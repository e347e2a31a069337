#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fincds/cli.hpp"
#include "fincds/errors.hpp"
#include "fincds/io.hpp"

#include "helpers.hpp"

#include <cstdio>
#include <random>
#include <sstream>

using namespace fincds;
using namespace fincds::testing;

namespace {

struct CliRun {
    int code;
    std::string out, err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = std::string("/tmp/fincds_test_") + name;
    write_file(path, content);
    return path;
}

}  // namespace

TEST_CASE("instance documents round-trip") {
    for (const char* name : {"example1.json", "figure2.json", "appendix_a.json", "appendix_c.json"}) {
        FinancialSystem first = parse_instance(read_file(data_path(name)));
        std::string text = serialize_instance(first);
        FinancialSystem second = parse_instance(text);
        CHECK(serialize_instance(second) == text);
    }
    std::mt19937 rng(67);
    for (int trial = 0; trial < 25; ++trial) {
        FinancialSystem sys = random_system(rng, 2 + rng() % 5, true);
        std::string text = serialize_instance(sys);
        CHECK(serialize_instance(parse_instance(text)) == text);
    }
    CHECK_THROWS_AS(parse_instance("{\"banks\": []}"), Error);
    CHECK_THROWS_AS(parse_instance("not json"), Error);
}

TEST_CASE("recovery vectors parse decimals exactly") {
    FinancialSystem sys;
    sys.add_bank("a", Rational(1));
    sys.add_bank("b");
    sys.add_debt("a", "b", Rational(1));
    RecoveryVector r = parse_recovery_vector("{\"a\": \"0.25\", \"b\": \"2/3\"}", sys,
                                             NumericMode::Rational);
    CHECK(r.rat[0] == Rational(1, 4));
    CHECK(r.rat[1] == Rational(2, 3));
    CHECK_THROWS_AS(parse_recovery_vector("{\"a\": \"1\"}", sys, NumericMode::Rational), Error);

    std::string text = serialize_recovery_vector(sys, r);
    RecoveryVector again = parse_recovery_vector(text, sys, NumericMode::Rational);
    CHECK(again.rat == r.rat);
}

TEST_CASE("circuit documents round-trip") {
    std::string text = read_file(data_path("const_half_circuit.json"));
    Circuit c = parse_circuit(text);
    std::string serialized = serialize_circuit(c);
    Circuit again = parse_circuit(serialized);
    CHECK(serialize_circuit(again) == serialized);
    CHECK(again.gates.size() == c.gates.size());
    CHECK_THROWS_AS(parse_circuit("{\"gates\": [{\"id\": \"g\", \"kind\": \"addd\"}]}"), Error);
}

TEST_CASE("solve command output and exit codes") {
    CliRun ex1 = run({"solve", data_path("example1.json")});
    CHECK(ex1.code == 0);
    CHECK(ex1.out.find("solver: acyclic") != std::string::npos);
    CHECK(ex1.out.find("(2/3, 1, 2/3, 1, 1, 1)") != std::string::npos);

    CliRun iter = run({"solve", data_path("figure2.json"), "--solver", "iterate", "--eps", "1e-9"});
    CHECK(iter.code == 0);
    CHECK(iter.out.find("0.2928932") != std::string::npos);

    CliRun refused = run({"solve", data_path("appendix_c.json"), "--solver", "scc"});
    CHECK(refused.code == 2);
    CHECK(refused.err.find("WeaklySwitchedPresent") != std::string::npos);

    CliRun missing = run({"solve", "/nonexistent/file.json"});
    CHECK(missing.code == 1);

    CliRun usage = run({"solve"});
    CHECK(usage.code == 1);
}

TEST_CASE("verify and analyze commands") {
    CliRun v = run({"verify", data_path("appendix_a.json"), data_path("appendix_a_exact.json"),
                    "--eps", "1/100"});
    CHECK(v.code == 0);
    CHECK(v.out.find("residual: 0") != std::string::npos);
    CHECK(v.out.find("clearing: yes") != std::string::npos);

    CliRun w = run({"verify", data_path("appendix_a.json"), data_path("appendix_a_weak.json"),
                    "--eps", "1/100"});
    CHECK(w.out.find("residual: 1/100") != std::string::npos);
    CHECK(w.out.find("clearing: no") != std::string::npos);
    CHECK(w.out.find("weak-eps (1/100): yes") != std::string::npos);

    CliRun a = run({"analyze", data_path("figure2.json")});
    CHECK(a.code == 0);
    CHECK(a.out.find("strongly switched cycle: ") != std::string::npos);
    CHECK(a.out.find("acyclic: no") != std::string::npos);

    CliRun c = run({"analyze", data_path("appendix_c.json")});
    CHECK(c.out.find("weakly-but-not-strongly switched: yes") != std::string::npos);
}

TEST_CASE("dot export colors") {
    FinancialSystem plain;
    plain.add_bank("a", Rational(1));
    plain.add_bank("b");
    plain.add_debt("a", "b", Rational(1));
    std::string dot = export_dot(plain);
    CHECK(dot.find("color=blue") != std::string::npos);
    CHECK(dot.find("color=orange") == std::string::npos);
    CHECK(dot.find("color=red") == std::string::npos);

    std::string cds_dot = export_dot(load_instance("appendix_a.json"));
    CHECK(cds_dot.find("color=orange") != std::string::npos);
    CHECK(cds_dot.find("color=red") != std::string::npos);
    CHECK(cds_dot.find("style=dashed") != std::string::npos);

    CliRun d = run({"export-dot", data_path("example1.json")});
    CHECK(d.code == 0);
    CHECK(d.out.find("digraph") != std::string::npos);
}

TEST_CASE("fragment command") {
    CliRun rw = run({"fragment", "g1a.g2b.d1.d2", "--rewrite"});
    CHECK(rw.code == 0);
    CHECK(rw.out == "g1a.g1a.g1a\n");

    CliRun solve = run({"fragment", "g1a.g1a", "--solve"});
    CHECK(solve.code == 0);
    CHECK(solve.out.find("(3 - 1*sqrt(5))/2 ≈ 0.381966011") != std::string::npos);

    CliRun emit = run({"fragment", "g1a.g1a", "--emit"});
    CHECK(emit.code == 0);
    FinancialSystem sys = parse_instance(emit.out);
    CHECK(sys.bank_count() > 0);

    CliRun rejected = run({"fragment", "g3a.d1", "--solve"});
    CHECK(rejected.code == 1);
    CHECK(rejected.err.find("G3FollowedByG3OrD") != std::string::npos);

    CliRun noop = run({"fragment", "g1a.g1a"});
    CHECK(noop.code == 1);
}

TEST_CASE("compile command produces a solvable instance") {
    std::string circuit = read_file(data_path("const_half_circuit.json"));
    std::string cpath = temp_file("const_half.json", circuit);
    std::string ipath = "/tmp/fincds_test_const_half.instance.json";
    std::string ppath = "/tmp/fincds_test_const_half.portmap.json";
    CliRun c = run({"compile", cpath, "--out-instance", ipath, "--out-portmap", ppath});
    CHECK(c.code == 0);

    CliRun s = run({"solve", ipath});
    CHECK(s.code == 0);
    CHECK(s.out.find("solver: acyclic") != std::string::npos);
    // the input bank leads the order, so the tuple starts with its rate
    CHECK(s.out.find("solution 1: (1/2") != std::string::npos);

    std::string portmap = read_file(ppath);
    CHECK(portmap.find("input_banks") != std::string::npos);
    std::remove(cpath.c_str());
    std::remove(ipath.c_str());
    std::remove(ppath.c_str());
}
