#include "elicit/harness/store.hpp"

#include <algorithm>
#include <sstream>

#include "elicit/error.hpp"
#include "elicit/rng.hpp"
#include "elicit/text.hpp"

namespace elicit::harness {

namespace fs = std::filesystem;

ResultRow ResultRow::from_run(const RunResult& r) {
  return ResultRow{r.method, r.budget, r.rho,  r.n_weak,       r.n_hq,
                   r.cost,   r.seed,   r.test_accuracy, r.weak_accuracy};
}

RunResult ResultRow::to_run() const {
  RunResult r;
  r.method = method;
  r.budget = budget;
  r.rho = rho;
  r.n_weak = n_weak;
  r.n_hq = n_hq;
  r.cost = cost;
  r.seed = seed;
  r.test_accuracy = test_acc;
  r.weak_accuracy = weak_acc;
  return r;
}

std::string format_row(const ResultRow& row) {
  return text::join_csv({row.method, row.budget.to_string(), text::format_double(row.rho),
                         std::to_string(row.n_weak), std::to_string(row.n_hq),
                         row.cost.to_string(), std::to_string(row.seed),
                         text::format_double(row.test_acc), text::format_double(row.weak_acc)});
}

ResultRow parse_row(std::string_view line, std::size_t line_no) {
  const auto fields = text::split_csv(line);
  const std::string where = "results line " + std::to_string(line_no);
  if (fields.size() != 9) {
    throw FormatError(where + ": expected 9 fields, found " + std::to_string(fields.size()));
  }
  try {
    ResultRow row;
    row.method = std::string(fields[0]);
    row.budget = Currency::parse(std::string(fields[1]));
    row.rho = text::parse_double(fields[2]);
    row.n_weak = text::parse_uint(fields[3]);
    row.n_hq = text::parse_uint(fields[4]);
    row.cost = Currency::parse(std::string(fields[5]));
    row.seed = text::parse_uint(fields[6]);
    row.test_acc = text::parse_double(fields[7]);
    row.weak_acc = text::parse_double(fields[8]);
    if (row.method.empty()) throw FormatError("empty method");
    return row;
  } catch (const std::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
}

void write_results_csv(const std::vector<ResultRow>& rows, const fs::path& path) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += format_row(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<ResultRow> read_results_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw FormatError(path.string() + ": missing results header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    rows.push_back(parse_row(line, line_no));
  }
  return rows;
}

void write_splits_csv(const Splits& splits, const fs::path& path) {
  std::string out = "id,split\n";
  auto emit = [&](const std::vector<std::uint64_t>& ids, std::string_view name) {
    for (auto id : ids) {
      out += std::to_string(id);
      out += ',';
      out += name;
      out += '\n';
    }
  };
  emit(splits.annotator_train, "annotator_train");
  emit(splits.candidate, "candidate");
  emit(splits.test, "test");
  write_file_atomic(path, out);
}

Splits read_splits_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "id,split") {
    throw FormatError(path.string() + ": missing splits header");
  }
  Splits s;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split_csv(line);
    if (f.size() != 2) throw FormatError(path.string() + " line " + std::to_string(line_no));
    const std::uint64_t id = text::parse_uint(f[0]);
    if (f[1] == "annotator_train") {
      s.annotator_train.push_back(id);
    } else if (f[1] == "candidate") {
      s.candidate.push_back(id);
    } else if (f[1] == "test") {
      s.test.push_back(id);
    } else {
      throw FormatError(path.string() + " line " + std::to_string(line_no) + ": unknown split");
    }
  }
  return s;
}

void write_annotations_file(const std::vector<Annotation>& annotations, const fs::path& path) {
  std::ostringstream out;
  write_annotations_csv(annotations, out);
  write_file_atomic(path, out.str());
}

std::vector<Annotation> read_annotations_file(const fs::path& path) {
  std::istringstream in(read_file(path));
  return read_annotations_csv(in);
}

std::string hex64(std::uint64_t value) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = kHex[(value >> (4 * i)) & 0xF];
  return out;
}

std::string file_hash(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw FormatError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::done: return "done";
    case JobStatus::infeasible: return "infeasible";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

namespace {

constexpr std::string_view kJournalHeader =
    "config_hash,job_id,status,cost_model,method,budget,rho,n_weak,n_hq,cost,seed,test_acc,"
    "weak_acc,reason";

std::string sanitize(std::string reason) {
  std::replace(reason.begin(), reason.end(), ',', ';');
  std::replace(reason.begin(), reason.end(), '\n', ' ');
  return reason;
}

}  // namespace

Journal::Journal(fs::path path, std::string config_hash)
    : path_(std::move(path)), hash_(std::move(config_hash)) {}

std::map<std::string, JournalEntry> Journal::load() const {
  std::map<std::string, JournalEntry> entries;
  if (!fs::exists(path_)) return entries;
  std::istringstream in(read_file(path_));
  std::string line;
  if (!std::getline(in, line) || line != kJournalHeader) {
    throw ValidationError("journal", path_.string() + " is not a sweep journal");
  }
  while (std::getline(in, line)) {
    if (line.empty() || in.eof()) {
      // A final line without its newline was cut off mid-write.
      if (!line.empty() && in.eof()) break;
      continue;
    }
    const auto f = text::split_csv(line);
    if (f.size() != 14) continue;
    if (f[0] != hash_) {
      throw ValidationError("journal", path_.string() + " was written by a different config (" +
                                           std::string(f[0]) + ")");
    }
    try {
      JournalEntry e;
      e.job_id = std::string(f[1]);
      if (f[2] == "done") {
        e.status = JobStatus::done;
      } else if (f[2] == "infeasible") {
        e.status = JobStatus::infeasible;
      } else if (f[2] == "failed") {
        e.status = JobStatus::failed;
      } else {
        continue;
      }
      e.cost_model = text::parse_uint(f[3]);
      if (e.status == JobStatus::done) {
        std::string row_text;
        for (std::size_t i = 4; i < 13; ++i) {
          if (i > 4) row_text += ',';
          row_text += f[i];
        }
        e.row = parse_row(row_text);
      }
      e.reason = std::string(f[13]);
      entries[e.job_id] = std::move(e);
    } catch (const std::exception&) {
      continue;
    }
  }
  return entries;
}

void Journal::reset() {
  std::lock_guard lock(mutex_);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  out_.close();
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw FormatError("cannot write " + path_.string());
  out_ << kJournalHeader << '\n';
  out_.flush();
}

void Journal::append(const JournalEntry& e) {
  std::lock_guard lock(mutex_);
  if (!out_.is_open()) {
    if (!fs::exists(path_)) {
      out_.open(path_, std::ios::binary | std::ios::trunc);
      out_ << kJournalHeader << '\n';
    } else {
      // Start on a fresh line in case the previous writer died mid-line.
      const std::string existing = read_file(path_);
      out_.open(path_, std::ios::binary | std::ios::app);
      if (!existing.empty() && existing.back() != '\n') out_ << '\n';
    }
    if (!out_) throw FormatError("cannot write " + path_.string());
  }
  std::string row_part;
  if (e.status == JobStatus::done) {
    row_part = format_row(e.row);
  } else {
    row_part = ",,,,,,,,";
  }
  out_ << hash_ << ',' << e.job_id << ',' << to_string(e.status) << ',' << e.cost_model << ','
       << row_part << ',' << sanitize(e.reason) << '\n';
  out_.flush();
}

}  // namespace elicit::harness
