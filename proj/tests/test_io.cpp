#include <doctest.h>

#include <filesystem>
#include <regex>
#include <sstream>

#include <fmt/format.h>

#include "rmpower/api.hpp"
#include "rmpower/csv.hpp"
#include "rmpower/errors.hpp"
#include "rmpower/report.hpp"
#include "rmpower/svg.hpp"

using namespace rmpower;
using json = nlohmann::json;

namespace {

std::string fixture_text(const char* name) { return io::read_file(std::string(RMPOWER_FIXTURES) + "/" + name); }

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "rmpower_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

CurveTable three_curves() {
  return power_curve(TestKind::BetweenGroups, {4, 5, 0}, {}, {0.1, 0.25, 0.4}, n_grid(8, 200, 4));
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("wide CSV: fixtures") {
  const RMDataset one = io::parse_wide_csv(fixture_text("ssep_one_group.csv"));
  CHECK(one.group_count() == 1);
  CHECK(one.subject_count() == 5);
  CHECK(one.times() == 5);
  CHECK(one.time_labels.front() == "baseline");
  CHECK(one.groups[0].rows[1][2] == 1.8748);

  const RMDataset three = io::parse_wide_csv(fixture_text("ssep_three_groups.csv"));
  REQUIRE(three.group_count() == 3);
  CHECK(three.groups[0].label == "left_hemi");
  CHECK(three.groups[2].label == "complete");
  CHECK(three.groups[2].rows[4][3] == 0.0001);
}

TEST_CASE("wide CSV: groups keep first-appearance order even when interleaved") {
  const RMDataset d = io::parse_wide_csv("group,subject,a,b\nz,1,1,2\nb,1,3,4\nz,2,5,6\nb,2,7,8\n");
  REQUIRE(d.group_count() == 2);
  CHECK(d.groups[0].label == "z");
  CHECK(d.groups[0].rows[1] == std::vector<double>{5, 6});
  CHECK(d.groups[1].label == "b");
}

TEST_CASE("wide CSV: quoting, BOM, CRLF and blank lines") {
  const std::string text = "\xEF\xBB\xBFgroup,subject,\"day, 1\",day2\r\n\"g,1\",s1,1.5,2\r\n\r\n\"g,1\",s2,3,4e-1\r\n";
  const RMDataset d = io::parse_wide_csv(text);
  CHECK(d.time_labels[0] == "day, 1");
  CHECK(d.groups[0].label == "g,1");
  CHECK(d.groups[0].rows[1][1] == doctest::Approx(0.4));
}

TEST_CASE("wide CSV: errors") {
  try {
    io::parse_wide_csv("");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()) == "no data rows");
  }
  CHECK_THROWS_WITH_AS(io::parse_wide_csv("group,subject,a,b\n"), "no data rows", ParseError);

  try {
    io::parse_wide_csv("group,subject,a,b\ng,1,1,2\ng,2,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    io::parse_wide_csv("group,subject,a,b\ng,1,1,2\ng,2,1,x2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 4);
  }
  try {
    io::parse_wide_csv("group,subject,a,b\nctl,7,1,2\nctl,8,3,4\nctl,7,5,6\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issue() == ValidationIssue::DuplicateSubject);
    const std::string msg = e.what();
    CHECK(msg.find("'ctl'") != std::string::npos);
    CHECK(msg.find("'7'") != std::string::npos);
  }
  // empty cell and NA are missing values
  try {
    io::parse_wide_csv("group,subject,a,b\ng,1,1,\ng,2,1,2\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issue() == ValidationIssue::MissingCell);
  }
  CHECK_THROWS_AS(io::parse_wide_csv("group,subject,a,b\ng,1,1,NA\ng,2,1,2\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_wide_csv("id,subject,a,b\ng,1,1,2\n"), ParseError);
  CHECK_THROWS_AS(io::parse_wide_csv("group,subject,a,b\n\"g,1,1,2\n"), ParseError);
}

TEST_CASE("long CSV converts to the same dataset as wide") {
  const RMDataset wide = io::parse_wide_csv(fixture_text("ssep_three_groups.csv"));
  std::string long_text = "group,subject,time,value\n";
  for (const auto& b : wide.groups)
    for (std::size_t i = 0; i < b.rows.size(); ++i)
      for (std::size_t j = 0; j < wide.times(); ++j)
        long_text += b.label + "," + b.subjects[i] + "," + wide.time_labels[j] + "," + fmt::format("{}", b.rows[i][j]) + "\n";
  const RMDataset from_long = io::parse_long_csv(long_text);
  CHECK(from_long.time_labels == wide.time_labels);
  REQUIRE(from_long.group_count() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(from_long.groups[k].rows == wide.groups[k].rows);
  CHECK(io::to_wide_csv(from_long) == io::to_wide_csv(wide));
  CHECK(io::parse_wide_csv(io::to_wide_csv(wide)).groups[1].rows == wide.groups[1].rows);

  CHECK_THROWS_AS(io::parse_long_csv("group,subject,time,value\ng,1,a,1\ng,1,a,2\n"), ParseError);
  CHECK_THROWS_AS(io::parse_long_csv("group,subject,when,value\ng,1,a,1\n"), ParseError);
  // subject 2 lacks time b
  CHECK_THROWS_AS(io::parse_long_csv("group,subject,time,value\ng,1,a,1\ng,1,b,2\ng,2,a,3\n"), Error);
}

TEST_CASE("curve CSV round-trips exactly") {
  const CurveTable c = three_curves();
  const CurveTable back = io::parse_curve_csv(io::curve_to_csv(c));
  REQUIRE(back.rows.size() == c.rows.size());
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    CHECK(back.rows[i].f == c.rows[i].f);
    CHECK(back.rows[i].n_total == c.rows[i].n_total);
    CHECK(back.rows[i].power == c.rows[i].power);
  }
  CHECK(io::curve_to_csv(c).rfind("f,n_total,power\n", 0) == 0);
}

TEST_CASE("SVG: one polyline per effect size with legend") {
  const std::string svg = svg::render_curve_svg(three_curves());
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<polyline") == 3);
  CHECK(svg.find(">f=0.1<") != std::string::npos);
  CHECK(svg.find(">f=0.25<") != std::string::npos);
  CHECK(svg.find(">f=0.4<") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  // every plotted y lies inside the [0, 1] band of the plot area
  const std::regex pts(R"(points="([^"]*)\")");
  for (std::sregex_iterator it(svg.begin(), svg.end(), pts), end; it != end; ++it) {
    std::istringstream in((*it)[1].str());
    std::string pair;
    while (in >> pair) {
      const double y = std::stod(pair.substr(pair.find(',') + 1));
      CHECK(y >= 40.0 - 1e-9);
      CHECK(y <= 420.0 + 1e-9);
    }
  }
}

TEST_CASE("SVG: single point renders a marker") {
  CurveTable c;
  c.rows.push_back({0.25, 40, 0.5});
  const std::string svg = svg::render_curve_svg(c);
  CHECK(count(svg, "<circle") == 1);
  CHECK(count(svg, "<polyline") == 0);
  CHECK_THROWS_AS(svg::render_curve_svg(CurveTable{}), Error);
}

TEST_CASE("SVG emission writes the CSV alongside") {
  const auto dir = scratch_dir();
  const auto csv = svg::emit_curve_svg(three_curves(), dir / "curve.svg");
  CHECK(csv == dir / "curve.csv");
  CHECK(std::filesystem::exists(dir / "curve.svg"));
  const CurveTable back = io::parse_curve_csv(io::read_file(csv));
  CHECK(back.rows.size() == three_curves().rows.size());
  CHECK_THROWS_AS(svg::emit_curve_svg(three_curves(), dir / "missing" / "x.svg"), Error);
}

TEST_CASE("JSON reports are canonical: parse then dump reproduces the bytes") {
  const json reports[] = {
      api::nsize({{"kind", "within"}, {"g", 4}, {"t", 5}}),
      api::power({{"g", 4}, {"t", 5}, {"n", 40}, {"f", 0.1}}),
      api::mde({{"kind", "interaction"}, {"g", 4}, {"t", 5}, {"n", 20}}),
      api::curve({{"g", 3}, {"t", 3}, {"n_max", 30}}),
      api::anova({fixture_text("ssep_three_groups.csv"), false, true, true, false}),
      api::anova({fixture_text("ssep_one_group.csv"), false, true, false, true}),
      api::simulate({{"kind", "within"}, {"g", 2}, {"t", 3}, {"n", 10}, {"reps", 200}}),
  };
  for (const auto& r : reports) {
    const std::string text = report::canonical(r);
    CHECK(report::canonical(json::parse(text)) == text);
    CHECK(r.at("schema_version") == report::kSchemaVersion);
  }
}

TEST_CASE("ANOVA table survives a JSON round trip") {
  AnovaOptions o;
  o.greenhouse_geisser = true;
  o.huynh_feldt = true;
  const AnovaTable t = run_anova(io::parse_wide_csv(fixture_text("ssep_three_groups.csv")), o);
  const AnovaTable back = report::anova_table_from_json(report::to_json(t));
  CHECK(back.groups == t.groups);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].source == t.rows[i].source);
    CHECK(back.rows[i].ss == t.rows[i].ss);
    CHECK(back.rows[i].f == t.rows[i].f);
    CHECK(back.rows[i].p == t.rows[i].p);
    CHECK(back.rows[i].adjusted.size() == t.rows[i].adjusted.size());
  }
  REQUIRE(back.sphericity);
  CHECK(back.sphericity->eps_gg == t.sphericity->eps_gg);
  CHECK(report::to_json(back) == report::to_json(t));

  const PowerResult pr = compute_power(TestKind::WithinTime, {4, 5, 24}, {});
  const PowerResult pr2 = report::power_result_from_json(report::to_json(pr));
  CHECK(pr2.power == pr.power);
  CHECK(pr2.spec.df2 == pr.spec.df2);
  CHECK_THROWS_AS(report::anova_table_from_json(json::object()), ParseError);
}

TEST_CASE("text rendering of numbers") {
  CHECK(report::format_f(2.066084) == "2.0661");
  CHECK(report::format_f(25.78545) == "25.7855");
  CHECK(report::format_p(0.13313) == "0.133");
  CHECK(report::format_p(0.00077) == "0.001");
  CHECK(report::format_p(0.00049) == "<0.001");
  CHECK(report::format_p(4.5e-5) == "<0.001");
  CHECK(report::format_p(1.0) == "1.000");
}

TEST_CASE("rendered ANOVA text") {
  const json r = api::anova({fixture_text("ssep_one_group.csv"), false, false, false, false});
  const std::string text = report::render_anova(r);
  CHECK(text.find("2.0661") != std::string::npos);
  CHECK(text.find("0.133") != std::string::npos);
  const std::string three = report::render_anova(api::anova({fixture_text("ssep_three_groups.csv")}));
  CHECK(three.find("25.7855") != std::string::npos);
  CHECK(three.find("Group x Time") != std::string::npos);
  // re-rendering the parsed JSON gives identical text
  CHECK(report::render_anova(json::parse(report::canonical(r))) == text);
}

TEST_CASE("error bodies carry kind and coordinates") {
  const json e = report::error_json(ValidationError(ValidationIssue::MissingCell, "gap", 1, 2, 3));
  CHECK(e.at("type") == "error");
  CHECK(e.at("error").at("kind") == "validation");
  CHECK(e.at("error").at("issue") == "missing_cell");
  CHECK(e.at("error").at("row") == 2);
  const json p = report::error_json(ParseError("bad", 4, 5));
  CHECK(p.at("error").at("kind") == "parse");
  CHECK(p.at("error").at("line") == 4);
}

TEST_CASE("API handlers validate requests") {
  CHECK_THROWS_AS(api::power({{"g", 4}, {"t", 5}}), ParseError);                       // n missing
  CHECK_THROWS_AS(api::power({{"g", 4}, {"t", 5}, {"n", 20}, {"bogus", 1}}), ParseError);
  CHECK_THROWS_AS(api::power({{"g", 4}, {"t", 5}, {"n", 20.5}}), ParseError);
  CHECK_THROWS_AS(api::power({{"g", "4"}, {"t", 5}, {"n", 20}}), ParseError);
  CHECK_THROWS_AS(api::power(json::array()), ParseError);
  CHECK_THROWS_AS(api::simulate({{"g", 2}, {"t", 3}, {"n", 10}, {"reps", 500}}, {200, 1}), Error);

  const auto ok = api::dispatch("nsize", R"({"kind":"within","g":4,"t":5})", {});
  CHECK(ok.status == 200);
  CHECK(ok.body.at("n_total") == 24);
  CHECK(api::dispatch("nsize", "{not json", {}).status == 400);
  CHECK(api::dispatch("nsize", R"({"g":4,"t":5,"f":0.001,"max_n":50})", {}).status == 422);
  CHECK(api::dispatch("teapot", "{}", {}).status == 404);
  CHECK(api::dispatch("health", "", {}).body.at("status") == "ok");
  CHECK(api::dispatch("power", R"({"g":4,"t":5,"n":1e30})", {}).status == 400);
}

}
