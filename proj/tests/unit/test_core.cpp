#include <doctest.h>

#include <filesystem>
#include <set>

#include "pilotwave/errors.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/io.hpp"
#include "pilotwave/rng.hpp"

using namespace pilotwave;

TEST_CASE("cells tile the interval and sample points sit at cell centres") {
    const Grid1D g(10, -1.0, 1.0);
    CHECK(g.dx() == doctest::Approx(0.2));
    CHECK(g.x(0) == doctest::Approx(-0.9));
    CHECK(g.x(9) == doctest::Approx(0.9));
    CHECK(g.cell_of(-1.0) == 0);
    CHECK(g.cell_of(-0.81) == 0);
    CHECK(g.cell_of(-0.79) == 1);
    CHECK(g.cell_of(1.0) == 9);
    CHECK(g.cell_of(5.0) == 9);
    CHECK(g.points().size() == 10);
}

TEST_CASE("periodic wrap maps into [x_min, x_max)") {
    const Grid1D g(16, 0.0, 2.0);
    CHECK(g.wrap(2.5) == doctest::Approx(0.5));
    CHECK(g.wrap(-0.5) == doctest::Approx(1.5));
    CHECK(g.wrap(2.0) == doctest::Approx(0.0));
    const Grid1D r(16, 0.0, 2.0, Boundary::reflecting);
    CHECK(r.wrap(2.5) == 2.5);
}

TEST_CASE("grid construction rejects degenerate input") {
    CHECK_THROWS_AS(Grid1D(4, 0.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(Grid1D(16, 1.0, 1.0), PreconditionError);
    CHECK(boundary_from_string("reflecting") == Boundary::reflecting);
    CHECK(to_string(Boundary::periodic) == "periodic");
    CHECK_THROWS(boundary_from_string("absorbing"));
}

TEST_CASE("rng streams are reproducible and distinct") {
    auto a = stream_rng(42, 7);
    auto b = stream_rng(42, 7);
    auto c = stream_rng(42, 8);
    auto d = stream_rng(43, 7);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
    std::set<std::uint64_t> first;
    for (std::uint64_t i = 0; i < 1000; ++i) first.insert(stream_rng(1, i)());
    CHECK(first.size() == 1000);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double u = uniform01(a);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("number formatting round-trips and is locale free") {
    CHECK(io::format_number(3.0) == "3");
    CHECK(io::format_number(-0.0) == "0");
    CHECK(io::format_number(0.1) == "0.10000000000000001");
    CHECK(std::stod(io::format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(io::format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("csv writer enforces row width") {
    io::CsvWriter w({"a", "b"});
    w.row({1.0, 2.5});
    CHECK(w.str() == "a,b\n1,2.5\n");
    CHECK(w.rows() == 1);
    CHECK_THROWS_AS(w.row({1.0}), PreconditionError);
}

TEST_CASE("output directory records checksums of written files") {
    const auto root = std::filesystem::temp_directory_path() / "pilotwave_io_test";
    std::filesystem::remove_all(root);
    io::OutputDir out(root / "nested");
    out.write("x.csv", "hello\n");
    out.write("x.csv", "hello again\n");
    REQUIRE(out.files().size() == 1);
    CHECK(out.files()[0].sha256 == io::sha256_file(root / "nested" / "x.csv"));
    CHECK(out.files()[0].bytes == 12);
    CHECK(!std::filesystem::exists(root / "nested" / "x.csv.tmp"));
    std::filesystem::remove_all(root);
}
