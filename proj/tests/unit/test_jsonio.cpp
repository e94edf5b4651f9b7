#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "iterag/error.hpp"
#include "iterag/jsonio.hpp"

using iterag::json;

TEST_CASE("canonical dump sorts keys and strips whitespace") {
    json a;
    a["zeta"] = 1;
    a["alpha"] = json{{"y", 2}, {"x", 1}};
    json b;
    b["alpha"] = json{{"x", 1}, {"y", 2}};
    b["zeta"] = 1;
    CHECK(iterag::canonical_dump(a) == iterag::canonical_dump(b));
    CHECK(iterag::canonical_dump(a) == R"({"alpha":{"x":1,"y":2},"zeta":1})");
}

TEST_CASE("payload digest ignores key insertion order and is 16 hex chars") {
    json a = json::parse(R"({"question":"q","n_max":4})");
    json b = json::parse(R"({"n_max":4,"question":"q"})");
    const auto da = iterag::payload_digest(a);
    CHECK(da == iterag::payload_digest(b));
    CHECK(da.size() == 16);
    for (char c : da) CHECK(((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')));
    CHECK(da != iterag::payload_digest(json{{"question", "q"}, {"n_max", 5}}));
}

TEST_CASE("fnv1a64 matches the reference constants") {
    CHECK(iterag::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(iterag::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("seed_combine is deterministic and argument-sensitive") {
    const auto s1 = iterag::seed_combine(7, 1, 2);
    CHECK(s1 == iterag::seed_combine(7, 1, 2));
    CHECK(s1 != iterag::seed_combine(7, 2, 1));
    CHECK(iterag::seed_combine(7, "alpha") == iterag::seed_combine(7, "alpha"));
    CHECK(iterag::seed_combine(7, "alpha") != iterag::seed_combine(7, "beta"));
    CHECK(iterag::seed_combine(7, "alpha") != iterag::seed_combine(8, "alpha"));
}

TEST_CASE("reject_unknown_keys names the offender") {
    const json value = {{"known", 1}, {"oops", 2}};
    try {
        iterag::reject_unknown_keys(value, {"known"}, "test object");
        FAIL("expected ValidationError");
    } catch (const iterag::ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("oops") != std::string::npos);
    }
    CHECK_NOTHROW(iterag::reject_unknown_keys(json{{"known", 1}}, {"known"}, "test object"));
}

TEST_CASE("read_file errors name the path") {
    try {
        iterag::read_file("does/not/exist.json");
        FAIL("expected Error");
    } catch (const iterag::Error& e) {
        CHECK(std::string(e.what()).find("does/not/exist.json") != std::string::npos);
    }
}

TEST_CASE("read_lines skips blanks and keeps 1-based numbering") {
    const auto dir = std::filesystem::path(ITERAG_TEST_TMP) / "jsonio";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "lines.txt").string();
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "first\n\nthird\n";
    }
    const auto lines = iterag::read_lines(path);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].first == 1);
    CHECK(lines[0].second == "first");
    CHECK(lines[1].first == 3);
    CHECK(lines[1].second == "third");
}
