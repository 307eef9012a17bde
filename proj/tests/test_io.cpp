#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "lomap/error.hpp"
#include "lomap/io.hpp"

using namespace lomap;

namespace {

template <typename Fn>
int error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return 0;
}

std::string temp_path(const char* name) {
  return std::string("io_test_") + name;
}

}  // namespace

TEST_CASE("fnv1a64 matches published vectors") {
  // Reference values from the FNV specification test suite.
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("writer serializes little-endian regardless of host") {
  io::Writer w;
  w.u32(0x01020304u);
  w.u64(0x0102030405060708ULL);
  const auto& b = w.buffer();
  REQUIRE(b.size() == 12);
  CHECK(b[0] == 0x04);
  CHECK(b[1] == 0x03);
  CHECK(b[2] == 0x02);
  CHECK(b[3] == 0x01);
  CHECK(b[4] == 0x08);
  CHECK(b[11] == 0x01);
}

TEST_CASE("scalar round trip through a file with checksum") {
  const std::string path = temp_path("scalars.bin");
  io::Writer w;
  w.magic("TEST");
  w.u8(7);
  w.u32(123456789u);
  w.u64(0xdeadbeefcafef00dULL);
  w.i64(-42);
  w.f32(1.5f);
  w.f64(-2.25);
  w.finish(path);

  io::Reader r(path);
  r.verify_checksum();
  r.expect_magic("TEST");
  CHECK(r.u8() == 7);
  CHECK(r.u32() == 123456789u);
  CHECK(r.u64() == 0xdeadbeefcafef00dULL);
  CHECK(r.i64() == -42);
  CHECK(r.f32() == 1.5f);
  CHECK(r.f64() == -2.25);
  CHECK(r.at_footer());
  std::remove(path.c_str());
}

TEST_CASE("corrupted byte fails the checksum as a data error") {
  io::Writer w;
  w.magic("TEST");
  w.u64(99);
  w.finish(temp_path("corrupt.bin"));

  std::string text = io::read_text_file(temp_path("corrupt.bin"));
  text[5] = static_cast<char>(text[5] ^ 0x40);
  io::write_text_file(temp_path("corrupt.bin"), text);

  CHECK(error_code([&] {
          io::Reader r(temp_path("corrupt.bin"));
          r.verify_checksum();
        }) == 3);
  std::remove(temp_path("corrupt.bin").c_str());
}

TEST_CASE("wrong magic and truncation are data errors") {
  io::Writer w;
  w.magic("ABCD");
  w.u32(5);
  w.finish(temp_path("magic.bin"));
  CHECK(error_code([&] {
          io::Reader r(temp_path("magic.bin"));
          r.expect_magic("WXYZ");
        }) == 3);
  CHECK(error_code([&] {
          io::Reader r(temp_path("magic.bin"));
          r.expect_magic("ABCD");
          r.u32();
          r.u64();  // reads into the checksum and beyond
          r.u64();
        }) == 3);
  CHECK(error_code([] { io::Reader r("io_test_missing.bin"); }) == 3);
  std::remove(temp_path("magic.bin").c_str());
}

TEST_CASE("csv formatting is stable and quoted only when needed") {
  io::Csv csv;
  csv.header({"a", "b", "c"});
  csv.cell(std::string("plain"));
  csv.cell(0.1);
  csv.cell(std::uint64_t(18446744073709551615ULL));
  csv.end_row();
  csv.cell(std::string("with,comma"));
  csv.cell(1e20);
  csv.cell(-3);
  csv.end_row();
  CHECK(csv.text() ==
        "a,b,c\n"
        "plain,0.1,18446744073709551615\n"
        "\"with,comma\",1e+20,-3\n");
}

TEST_CASE("format_double uses 12 significant digits") {
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_double(-0.0001) == "-0.0001");
  CHECK(io::format_double(0) == "0");
}

TEST_CASE("text file round trip") {
  const std::string path = temp_path("text.txt");
  io::write_text_file(path, "line1\nline2\n");
  CHECK(io::read_text_file(path) == "line1\nline2\n");
  std::remove(path.c_str());
  CHECK(error_code([&] { io::read_text_file(path); }) == 3);
}
