#include <random>
#include <string>

#include "doctest.h"
#include "fnc/bytes.hpp"
#include "fnc/container.hpp"
#include "fnc/error.hpp"
#include "fnc/pbm.hpp"
#include "fnc/report.hpp"
#include "fnc/series_io.hpp"

using fnc::BinaryImage;
using namespace fnc::io;

namespace {

Bytes ascii(const std::string& s) { return Bytes(s.begin(), s.end()); }

BinaryImage random_image(int w, int h, std::mt19937_64& rng) {
  std::bernoulli_distribution on(0.5);
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, on(rng));
  return img;
}

}  // namespace

TEST_CASE("parse_pbm") {
  SUBCASE("plain 2x2") {
    const BinaryImage img = parse_pbm(ascii("P1 2 2 0 1 1 0"));
    REQUIRE(img.width() == 2);
    REQUIRE(img.height() == 2);
    CHECK(!img(0, 0));
    CHECK(img(1, 0));
    CHECK(img(0, 1));
    CHECK(!img(1, 1));
  }
  SUBCASE("comments and packed plain digits") {
    const BinaryImage img = parse_pbm(ascii("P1\n# a comment\n3 1\n101\n"));
    CHECK(img(0, 0));
    CHECK(!img(1, 0));
    CHECK(img(2, 0));
  }
  SUBCASE("raw rows are padded to whole bytes") {
    Bytes raw = ascii("P4 3 2\n");
    raw.push_back(0b10100000);
    raw.push_back(0b01000000);
    const BinaryImage img = parse_pbm(raw);
    CHECK(img(0, 0));
    CHECK(img(2, 0));
    CHECK(img(1, 1));
    CHECK(img.count() == 3);
  }
  SUBCASE("graymap thresholding") {
    const BinaryImage img = parse_pbm(ascii("P2 3 1 255 0 200 100"));
    CHECK(img(0, 0));
    CHECK(!img(1, 0));
    CHECK(img(2, 0));
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_pbm(ascii("P7 2 2 0 1 1 0")), fnc::FormatError);
    CHECK_THROWS_AS(parse_pbm(ascii("P1 2 2 0 1 1")), fnc::FormatError);
    CHECK_THROWS_AS(parse_pbm(ascii("P4 16 2\n\x01")), fnc::FormatError);
    CHECK_THROWS_AS(parse_pbm(ascii("P1 99999999999 2")), fnc::FormatError);
    CHECK_THROWS_AS(parse_pbm(ascii("")), fnc::FormatError);
  }
}

TEST_CASE("write_pbm round trips") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> side(1, 40);
  for (int t = 0; t < 40; ++t) {
    const BinaryImage img = random_image(side(rng), side(rng), rng);
    CHECK(parse_pbm(write_pbm(img, PbmMode::plain)) == img);
    CHECK(parse_pbm(write_pbm(img, PbmMode::raw)) == img);
  }
  const BinaryImage odd = random_image(13, 5, rng);
  const Bytes raw = write_pbm(odd, PbmMode::raw);
  CHECK(raw.size() == std::string("P4\n13 5\n").size() + 2 * 5);

  BinaryImage one(1, 1);
  one.set(0, 0);
  CHECK(parse_pbm(write_pbm(one, PbmMode::plain)) == one);
  CHECK(parse_pbm(write_pbm(one, PbmMode::raw)) == one);
}

TEST_CASE("byte reader and writer") {
  ByteWriter w;
  w.u8(7);
  w.u16(0x1234);
  w.u32(0xdeadbeef);
  w.u64(0x0102030405060708ULL);
  w.f64(-0.1);
  const Bytes b = w.take();
  CHECK(b.size() == 1 + 2 + 4 + 8 + 8);
  CHECK(b[1] == 0x34);
  CHECK(b[2] == 0x12);
  ByteReader r(b);
  CHECK(r.u8() == 7);
  CHECK(r.u16() == 0x1234);
  CHECK(r.u32() == 0xdeadbeef);
  CHECK(r.u64() == 0x0102030405060708ULL);
  CHECK(r.f64() == -0.1);
  CHECK_NOTHROW(r.expect_end("test"));
  CHECK_THROWS_AS(r.u8(), fnc::FormatError);
}

TEST_CASE("container") {
  for (const Method m : {Method::ifs, Method::ae, Method::vq, Method::net}) {
    Container c;
    c.method = m;
    c.width = 57;
    c.height = 43;
    c.block_side = 20;
    c.pad_right = 3;
    c.pad_bottom = 17;
    c.payload = {1, 2, 3, 4, 5};
    const Bytes bytes = write_container(c);
    CHECK(bytes.size() == kContainerHeaderBytes + 5);
    CHECK(read_container(bytes) == c);
  }

  Container c;
  c.payload = {9, 9};
  Bytes bytes = write_container(c);
  SUBCASE("corrupted length") {
    bytes[20] = 3;
    CHECK_THROWS_AS(read_container(bytes), fnc::FormatError);
    Bytes truncated = write_container(c);
    truncated.pop_back();
    CHECK_THROWS_AS(read_container(truncated), fnc::FormatError);
  }
  SUBCASE("foreign magic") {
    bytes[0] = 'G';
    CHECK_THROWS_AS(read_container(bytes), fnc::FormatError);
    CHECK_THROWS_AS(read_container(ascii("P1 1 1 0")), fnc::FormatError);
  }
  SUBCASE("bad version and method") {
    Bytes v = bytes;
    v[4] = 2;
    CHECK_THROWS_AS(read_container(v), fnc::FormatError);
    bytes[5] = 4;
    CHECK_THROWS_AS(read_container(bytes), fnc::FormatError);
  }
}

TEST_CASE("series csv") {
  const auto v = parse_series_csv("value,label\n0.5,a\n\n 1e-3 \n-2\n", true);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 1e-3);
  CHECK(v[2] == -2.0);
  CHECK_THROWS_AS(parse_series_csv("x\n1\n", false), fnc::DataError);
  CHECK_THROWS_AS(parse_series_csv("1\nnan\n", false), fnc::DataError);

  const std::vector<double> xs{0.1, 1.0 / 3.0, 4.0e-300};
  CHECK(parse_series_csv(format_series_csv(xs, "x"), true) == xs);
}

TEST_CASE("run report") {
  fnc::report::RunReport r;
  r.method = "vq";
  r.original_bytes = 512;
  r.compressed_bytes = 2216;
  r.distortion = 0.25;
  r.seed = 3;
  r.config["m"] = 16;
  CHECK(r.ratio() == doctest::Approx(512.0 / 2216.0).epsilon(1e-12));
  const auto j = fnc::report::to_json(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"method", "original_bytes", "compressed_bytes", "ratio", "metric",
                                         "distortion", "wall_time", "seed", "config"});
  const std::string line = fnc::report::format_jsonl({r});
  CHECK(line.back() == '\n');
  CHECK(line.find("\"method\":\"vq\"") == 1);

  fnc::report::RunReport empty;
  CHECK(empty.ratio() == 0.0);
  const std::string table = fnc::report::format_table({r, empty});
  CHECK(table.rfind("method", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);
}
