#include "rmpower/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "rmpower/errors.hpp"

namespace rmpower::io {

namespace {

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Splits one line on commas; double quotes group a field and "" escapes a quote.
std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      out.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no, line.size());
  out.push_back(was_quoted ? field : trim(field));
  return out;
}

std::vector<Record> read_records(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<Record> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!trim(line).empty()) records.push_back({line_no, split_line(line, line_no)});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return records;
}

double parse_cell(const std::string& s, std::size_t line, std::size_t column) {
  if (s.empty() || s == "NA" || s == "na" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError("cannot parse '" + s + "' as a number", line, column);
  return v;
}

void expect_width(const Record& r, std::size_t width) {
  if (r.fields.size() != width)
    throw ParseError("expected " + std::to_string(width) + " columns, found " + std::to_string(r.fields.size()),
                     r.line, std::min(r.fields.size(), width) + 1);
}

GroupBlock& block_for(RMDataset& d, std::map<std::string, std::size_t>& index, const std::string& label) {
  auto [it, inserted] = index.try_emplace(label, d.groups.size());
  if (inserted) d.groups.push_back(GroupBlock{label, {}, {}});
  return d.groups[it->second];
}

}  // namespace

RMDataset parse_wide_csv(std::string_view text) {
  const auto records = read_records(text);
  if (records.empty()) throw ParseError("no data rows", 1, 1);
  const Record& header = records.front();
  if (header.fields.size() < 2 || lower(header.fields[0]) != "group" || lower(header.fields[1]) != "subject")
    throw ParseError("header must start with 'group,subject'", header.line, 1);
  if (records.size() == 1) throw ParseError("no data rows", header.line + 1, 1);

  RMDataset d;
  d.time_labels.assign(header.fields.begin() + 2, header.fields.end());
  const std::size_t width = header.fields.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    expect_width(rec, width);
    GroupBlock& block = block_for(d, index, rec.fields[0]);
    std::vector<double> row;
    row.reserve(width - 2);
    for (std::size_t c = 2; c < width; ++c) row.push_back(parse_cell(rec.fields[c], rec.line, c + 1));
    if (std::find(block.subjects.begin(), block.subjects.end(), rec.fields[1]) != block.subjects.end())
      throw ValidationError(ValidationIssue::DuplicateSubject,
                            "duplicate (group, subject) pair ('" + rec.fields[0] + "', '" + rec.fields[1] +
                                "') on line " + std::to_string(rec.line),
                            index.at(rec.fields[0]), block.subjects.size());
    block.subjects.push_back(rec.fields[1]);
    block.rows.push_back(std::move(row));
  }
  return validate_dataset(std::move(d));
}

RMDataset parse_long_csv(std::string_view text) {
  const auto records = read_records(text);
  if (records.empty()) throw ParseError("no data rows", 1, 1);
  const Record& header = records.front();
  expect_width(header, 4);
  static const char* const expected[] = {"group", "subject", "time", "value"};
  for (std::size_t c = 0; c < 4; ++c)
    if (lower(header.fields[c]) != expected[c])
      throw ParseError("long header must be 'group,subject,time,value'", header.line, c + 1);
  if (records.size() == 1) throw ParseError("no data rows", header.line + 1, 1);

  RMDataset d;
  std::map<std::string, std::size_t> time_index;
  std::map<std::string, std::size_t> group_index;
  // subject position within its group block
  std::vector<std::map<std::string, std::size_t>> subject_index;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    expect_width(rec, 4);
    const auto [tit, new_time] = time_index.try_emplace(rec.fields[2], d.time_labels.size());
    if (new_time) {
      d.time_labels.push_back(rec.fields[2]);
      for (auto& b : d.groups)
        for (auto& row : b.rows) row.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    GroupBlock& block = block_for(d, group_index, rec.fields[0]);
    const std::size_t k = group_index.at(rec.fields[0]);
    if (subject_index.size() <= k) subject_index.resize(k + 1);
    const auto [sit, new_subject] = subject_index[k].try_emplace(rec.fields[1], block.subjects.size());
    if (new_subject) {
      block.subjects.push_back(rec.fields[1]);
      block.rows.emplace_back(d.time_labels.size(), std::numeric_limits<double>::quiet_NaN());
    }
    double& cell = block.rows[sit->second][tit->second];
    if (!std::isnan(cell))
      throw ParseError("duplicate measurement for group '" + rec.fields[0] + "', subject '" + rec.fields[1] +
                           "', time '" + rec.fields[2] + "'",
                       rec.line, 3);
    cell = parse_cell(rec.fields[3], rec.line, 4);
  }
  return validate_dataset(std::move(d));
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_wide_csv(const RMDataset& data) {
  std::string out = "group,subject";
  for (const auto& t : data.time_labels) out += "," + quote(t);
  out += "\n";
  for (const auto& block : data.groups)
    for (std::size_t i = 0; i < block.rows.size(); ++i) {
      out += quote(block.label) + "," + quote(block.subjects[i]);
      for (double v : block.rows[i]) out += std::isnan(v) ? std::string(",") : fmt::format(",{}", v);
      out += "\n";
    }
  return out;
}

std::string curve_to_csv(const CurveTable& curve) {
  std::string out = "f,n_total,power\n";
  for (const auto& r : curve.rows) out += fmt::format("{},{},{}\n", r.f, r.n_total, r.power);
  return out;
}

CurveTable parse_curve_csv(std::string_view text) {
  const auto records = read_records(text);
  if (records.empty()) throw ParseError("no data rows", 1, 1);
  const Record& header = records.front();
  expect_width(header, 3);
  if (lower(header.fields[0]) != "f" || lower(header.fields[1]) != "n_total" || lower(header.fields[2]) != "power")
    throw ParseError("curve header must be 'f,n_total,power'", header.line, 1);
  CurveTable curve;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    expect_width(rec, 3);
    CurveRow row;
    row.f = parse_cell(rec.fields[0], rec.line, 1);
    const double n = parse_cell(rec.fields[1], rec.line, 2);
    if (!(n == std::floor(n))) throw ParseError("sample size must be an integer", rec.line, 2);
    row.n_total = static_cast<long>(n);
    row.power = parse_cell(rec.fields[2], rec.line, 3);
    curve.rows.push_back(row);
  }
  return curve;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

}  // namespace rmpower::io
