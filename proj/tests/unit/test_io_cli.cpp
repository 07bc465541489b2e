#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "asym/cli.hpp"
#include "asym/plot.hpp"
#include "asym/serialize.hpp"

using namespace asym;
using io::Json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("asym_unit_" + name);
    fs::remove_all(p);
    return p;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = asym::cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("state, Hamiltonian and group configs") {
    CHECK((io::state_from_json(Json::parse(R"({"basis": 1, "dim": 3})"), "s").matrix() - DensityMatrix::basis(3, 1).matrix()).norm() == 0.0);
    CHECK(io::state_from_json(Json::parse(R"({"maximally_mixed": 4})"), "s").purity() == doctest::Approx(0.25));
    CHECK(io::state_from_json(Json::parse(R"({"uniform": 2})"), "s").matrix()(0, 1).real() == doctest::Approx(0.5));
    CHECK(io::state_from_json(Json::parse(R"({"diagonal": [0.25, 0.75]})"), "s").matrix()(1, 1).real() == doctest::Approx(0.75));
    const DensityMatrix pure = io::state_from_json(Json::parse(R"({"pure": {"re": [1, 0], "im": [0, 1]}})"), "s");
    CHECK(pure.matrix()(1, 0).imag() == doctest::Approx(0.5));
    CHECK_THROWS_AS(io::state_from_json(Json::parse(R"({"uniform": 2, "extra": 1})"), "s"), ValidationError);
    CHECK_THROWS_AS(io::state_from_json(Json::parse(R"({"diagonal": [0.5, 0.6]})"), "s"), ValidationError);

    CHECK(io::hamiltonian_from_json(Json::parse(R"({"energies": [0, 2]})"), "h").dim() == 2);
    CHECK(io::group_from_json(Json::parse(R"({"type": "permutation", "n": 3})"), "g").order() == 6);
    CHECK(io::group_from_json(Json::parse(R"({"type": "cyclic", "order": 3, "energies": [0, 1]})"), "g").order() == 3);
    CHECK_THROWS_AS(io::group_from_json(Json::parse(R"({"type": "lorentz"})"), "g"), ValidationError);
}

TEST_CASE("matrix round trips") {
    ComplexMatrix real(2, 2);
    real << 1, 2, 3, 4;
    const Json jr = io::to_json(real);
    CHECK(jr.is_array());
    CHECK((io::matrix_from_json(jr, "m") - real).norm() == 0.0);

    ComplexMatrix cplx = real;
    cplx(0, 1) = Complex(2, -1);
    const Json jc = io::to_json(cplx);
    CHECK(jc.contains("re"));
    CHECK((io::matrix_from_json(jc, "m") - cplx).norm() == 0.0);
    CHECK_THROWS_AS(io::matrix_from_json(Json::parse("[[1, 2], [3]]"), "m"), ValidationError);
}

TEST_CASE("csv, digests and canonical dumps") {
    CHECK(io::to_csv({"a", "b"}, {{1.0, 0.1}}) == "a,b\n1,0.10000000000000001\n");
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::dump(Json{{"b", 1}, {"a", 2}}) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}

TEST_CASE("svg plots") {
    const std::string one = plot::render_svg({{"point", {1.0}, {2.0}}}, {"t", "x", "y"});
    CHECK(one.rfind("<svg", 0) == 0);
    CHECK(count(one, "<circle") == 1);
    CHECK(count(one, "<polyline") == 0);

    const plot::Series a{"D = 4", {1, 2, 3}, {0.4, 0.3, 0.2}}, b{"D = 8", {1, 2, 3}, {0.45, 0.44, 0.4}};
    const std::string two = plot::render_svg({a, b}, {"coherence", "use", "c"});
    CHECK(count(two, "<polyline") == 2);
    CHECK(count(two, "D = 4") == 1);
    CHECK(count(two, "D = 8") == 1);
    CHECK(two == plot::render_svg({a, b}, {"coherence", "use", "c"}));

    CHECK_THROWS_AS(plot::render_svg({}, {"t", "x", "y"}), ValidationError);
    CHECK_THROWS_AS(plot::render_svg({{"empty", {}, {}}}, {"t", "x", "y"}), ValidationError);
}

TEST_CASE("cli: permutation writes a checksummed manifest") {
    const fs::path dir = scratch("perm");
    const CliResult r = run_cli({"permutation", "--n", "3", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("exact broadcast verified") != std::string::npos);
    const Json manifest = Json::parse(io::read_file(dir / "manifest.json"));
    CHECK(manifest["summary"]["verified"] == true);
    REQUIRE(manifest["artifacts"].size() == 1);
    const auto& art = manifest["artifacts"][0];
    CHECK(art["sha256"] == io::sha256_hex(io::read_file(dir / art["path"].get<std::string>())));
    CHECK(manifest["config_hash"] == io::sha256_hex(manifest["config"].dump()));
}

TEST_CASE("cli: clock table and determinism") {
    const fs::path a = scratch("clock_a"), b = scratch("clock_b");
    CHECK(run_cli({"clock", "--alphas", "1,2,3,4", "--out", a.string()}).code == 0);
    CHECK(run_cli({"--out", b.string(), "clock", "--alphas", "1,2,3,4"}).code == 0);
    const Json manifest = Json::parse(io::read_file(a / "manifest.json"));
    CHECK(manifest["summary"]["strictly_decreasing"] == true);
    CHECK(fs::exists(a / "clock.svg"));
    CHECK(fs::exists(a / "clock.csv"));
    CHECK(io::read_file(a / "manifest.json") == io::read_file(b / "manifest.json"));
}

TEST_CASE("cli: feasibility config and strict mode") {
    const fs::path dir = scratch("t1");
    const fs::path cfg = fs::path(ASYM_SOURCE_DIR) / "configs" / "t1_qubit.json";
    const CliResult r = run_cli({"feasibility", "--config", cfg.string(), "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("NumericallyInfeasible") != std::string::npos);
    CHECK(fs::exists(dir / "feasibility.json"));
    CHECK(fs::exists(dir / "residuals.csv"));

    const CliResult capped = run_cli({"feasibility", "--config", cfg.string(), "--max-iterations", "20", "--strict", "--out", dir.string()});
    CHECK(capped.code == 2);
    const CliResult lenient = run_cli({"feasibility", "--config", cfg.string(), "--max-iterations", "20", "--out", dir.string()});
    CHECK(lenient.code == 0);
}

TEST_CASE("cli: malformed input exits 1 with the field named") {
    const fs::path dir = scratch("bad");
    fs::create_directories(dir);
    io::write_file(dir / "unknown.json", R"({"state": {"uniform": 2}, "colour": "blue"})");
    CliResult r = run_cli({"fisher", "--config", (dir / "unknown.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("config.colour") != std::string::npos);

    io::write_file(dir / "broken.json", "{\"state\": ");
    CHECK(run_cli({"fisher", "--config", (dir / "broken.json").string(), "--out", (dir / "o").string()}).code == 1);

    io::write_file(dir / "wrong_type.json", R"({"n": "three"})");
    r = run_cli({"permutation", "--config", (dir / "wrong_type.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("config.n") != std::string::npos);

    io::write_file(dir / "other.json", R"({"command": "clock"})");
    CHECK(run_cli({"fisher", "--config", (dir / "other.json").string(), "--out", (dir / "o").string()}).code == 1);

    CHECK(run_cli({"teleport"}).code == 1);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"aberg", "--boundary", "open", "--out", (dir / "o").string()}).code == 1);
    CHECK(run_cli({"fisher", "--tol-feas", "1e-3", "--tol-infeas", "1e-4", "--out", (dir / "o").string()}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("cli: plotting commands emit svg") {
    const fs::path dir = scratch("aberg");
    CHECK(run_cli({"aberg", "--dims", "4,8", "--uses", "6", "--out", dir.string()}).code == 0);
    const std::string svg = io::read_file(dir / "aberg.svg");
    CHECK(count(svg, "<polyline") == 2);
    const Json manifest = Json::parse(io::read_file(dir / "manifest.json"));
    CHECK(manifest["artifacts"].size() == 3);

    const fs::path sdir = scratch("scan");
    CHECK(run_cli({"scan", "--slacks", "0,1", "--rounds", "6", "--out", sdir.string()}).code == 0);
    CHECK(fs::exists(sdir / "scan.svg"));
    const Json scan = Json::parse(io::read_file(sdir / "scan.json"));
    CHECK(scan["points"][0]["best"].get<double>() <= 1e-3);
    CHECK(scan["points"][1]["best"].get<double>() >= 0.45);
}

TEST_CASE("cli: small commands") {
    const fs::path dir = scratch("small");
    CliResult r = run_cli({"fisher", "--out", (dir / "f").string()});
    CHECK(r.code == 0);
    CHECK(Json::parse(io::read_file(dir / "f" / "fisher.json"))["qfi"].get<double>() == doctest::Approx(1.0));
    CHECK(run_cli({"frameness", "--out", (dir / "fr").string()}).code == 0);
    CHECK(Json::parse(io::read_file(dir / "fr" / "frameness.json"))["relative_entropy_frameness"].get<double>() ==
          doctest::Approx(std::log(2.0)));
    CHECK(run_cli({"twirl", "--out", (dir / "t").string()}).code == 0);
    CHECK(run_cli({"covariance", "--out", (dir / "c").string()}).code == 0);
    CHECK(Json::parse(io::read_file(dir / "c" / "covariance.json"))["covariant"] == true);
    CHECK(run_cli({"thermal", "--beta", "0.7", "--out", (dir / "th").string()}).code == 0);
    CHECK(run_cli({"battery", "--trials", "20", "--out", (dir / "b").string()}).code == 0);
    const Json battery = Json::parse(io::read_file(dir / "b" / "battery.json"));
    CHECK(battery["demo"]["coherence_out"].get<double>() > 0.3);
    CHECK(battery["demo"]["disturbance"].get<double>() > 0.3);
    CHECK(run_cli({"ki", "--grid", "8", "--out", (dir / "k").string()}).code == 0);
}
