#include "introspect/logit_dump.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "introspect/error.hpp"
#include "introspect/math.hpp"

namespace introspect {

LogitRecord make_logit_record(DatasetTag tag, std::vector<float> logits,
                              std::optional<int> true_label) {
  LogitRecord r;
  r.tag = tag;
  r.predicted = argmax(logits);
  r.logits = std::move(logits);
  r.true_label = true_label;
  r.correct = true_label.has_value() && *true_label == r.predicted;
  validate_record(r);
  return r;
}

void validate_record(const LogitRecord& record) {
  if (record.logits.size() < 2) {
    raise(ErrorCode::kContract, "logit record: need at least 2 logits");
  }
  for (float v : record.logits) {
    if (!std::isfinite(v)) raise(ErrorCode::kContract, "logit record: non-finite logit");
  }
  if (record.predicted != argmax(record.logits)) {
    raise(ErrorCode::kContract, "logit record: predicted class " +
                                    std::to_string(record.predicted) +
                                    " is not the argmax of the logits");
  }
  if (record.correct) {
    if (!record.true_label || *record.true_label != record.predicted) {
      raise(ErrorCode::kContract,
            "logit record: correct bit set but the true label does not match");
    }
  }
}

void write_logit_dump(const std::vector<LogitRecord>& records,
                      const std::filesystem::path& path) {
  if (records.empty()) raise(ErrorCode::kContract, "logit dump: no records to write");
  const std::size_t k = records[0].logits.size();

  std::ofstream f(path, std::ios::trunc);
  if (!f) raise(ErrorCode::kIo, "logit dump: cannot open '" + path.string() + "' for writing");

  f << "tag,true_label,predicted,correct";
  for (std::size_t j = 0; j < k; ++j) f << ",logit_" << j;
  f << '\n';

  char buf[32];
  for (const LogitRecord& r : records) {
    validate_record(r);
    if (r.logits.size() != k) {
      raise(ErrorCode::kContract, "logit dump: inconsistent logit width");
    }
    f << tag_name(r.tag) << ',';
    if (r.true_label) f << *r.true_label;
    f << ',' << r.predicted << ',' << (r.correct ? 1 : 0);
    for (float v : r.logits) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
      f << ',' << buf;
    }
    f << '\n';
  }
  if (!f) raise(ErrorCode::kIo, "logit dump: short write to '" + path.string() + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  raise(ErrorCode::kFormat, "logit dump: line " + std::to_string(line_no) + ": " + what);
}

int parse_int(const std::string& s, std::size_t line_no, const char* what) {
  if (s.empty()) parse_fail(line_no, std::string("empty ") + what);
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) parse_fail(line_no, std::string("non-numeric ") + what + " '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::vector<LogitRecord> read_logit_dump(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) raise(ErrorCode::kIo, "logit dump: cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(f, line)) raise(ErrorCode::kFormat, "logit dump: empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 6 || header[0] != "tag" || header[1] != "true_label" ||
      header[2] != "predicted" || header[3] != "correct") {
    raise(ErrorCode::kFormat, "logit dump: unexpected header");
  }
  const std::size_t k = header.size() - 4;
  for (std::size_t j = 0; j < k; ++j) {
    if (header[4 + j] != "logit_" + std::to_string(j)) {
      raise(ErrorCode::kFormat, "logit dump: unexpected logit column '" + header[4 + j] + "'");
    }
  }

  std::vector<LogitRecord> records;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4 + k) {
      parse_fail(line_no, "expected " + std::to_string(4 + k) + " fields, got " +
                              std::to_string(fields.size()));
    }
    LogitRecord r;
    const auto tag = parse_tag(fields[0]);
    if (!tag) parse_fail(line_no, "unknown tag '" + fields[0] + "'");
    r.tag = *tag;
    if (!fields[1].empty()) r.true_label = parse_int(fields[1], line_no, "true_label");
    r.predicted = parse_int(fields[2], line_no, "predicted");
    const int correct = parse_int(fields[3], line_no, "correct");
    if (correct != 0 && correct != 1) parse_fail(line_no, "correct bit must be 0 or 1");
    r.correct = correct == 1;
    r.logits.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string& s = fields[4 + j];
      if (s.empty()) parse_fail(line_no, "empty logit_" + std::to_string(j));
      char* end = nullptr;
      const float v = std::strtof(s.c_str(), &end);
      if (end != s.c_str() + s.size() || !std::isfinite(v)) {
        parse_fail(line_no, "non-numeric logit '" + s + "'");
      }
      r.logits[j] = v;
    }
    if (r.predicted != argmax(r.logits)) {
      parse_fail(line_no, "predicted class " + std::to_string(r.predicted) +
                              " is not the argmax of the logits");
    }
    if (r.correct && (!r.true_label || *r.true_label != r.predicted)) {
      parse_fail(line_no, "correct bit inconsistent with true label");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace introspect
