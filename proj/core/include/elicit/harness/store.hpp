#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "elicit/annotators.hpp"
#include "elicit/currency.hpp"
#include "elicit/methods.hpp"
#include "elicit/synth_tasks.hpp"

namespace elicit::harness {

/// One line of a results CSV:
/// `method,budget,rho,n_weak,n_hq,cost,seed,test_acc,weak_acc`.
struct ResultRow {
  std::string method;
  Currency budget;
  double rho = 0.0;
  std::size_t n_weak = 0;
  std::size_t n_hq = 0;
  Currency cost;
  std::size_t seed = 0;
  double test_acc = 0.0;
  double weak_acc = 0.0;

  static ResultRow from_run(const RunResult& r);
  RunResult to_run() const;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline constexpr std::string_view kResultsHeader =
    "method,budget,rho,n_weak,n_hq,cost,seed,test_acc,weak_acc";

std::string format_row(const ResultRow& row);
/// Throws FormatError naming the line on malformed input.
ResultRow parse_row(std::string_view line, std::size_t line_no = 0);

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

/// Ids of one split, written as `id,split` with split in {annotator_train,
/// candidate, test}. Candidate rows include the annotator-train ids.
void write_splits_csv(const Splits& splits, const std::filesystem::path& path);
Splits read_splits_csv(const std::filesystem::path& path);

void write_annotations_file(const std::vector<Annotation>& annotations,
                            const std::filesystem::path& path);
std::vector<Annotation> read_annotations_file(const std::filesystem::path& path);

/// FNV-1a of a file's bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

enum class JobStatus { done, infeasible, failed };
std::string_view to_string(JobStatus status);

/// A journal line: the outcome of one (cell, seed) job.
struct JournalEntry {
  std::string job_id;
  JobStatus status = JobStatus::done;
  std::size_t cost_model = 0;
  ResultRow row;       // meaningful when status == done
  std::string reason;  // for infeasible and failed jobs
};

/// Append-only, line-buffered record of finished jobs, tagged with the config
/// hash. Lines that do not parse (e.g. cut off by a kill) are ignored on load.
class Journal {
 public:
  Journal(std::filesystem::path path, std::string config_hash);

  /// Entries already recorded for this config hash. Throws ValidationError if
  /// the file belongs to a different config.
  std::map<std::string, JournalEntry> load() const;

  /// Truncates and writes the header line.
  void reset();
  /// Thread-safe; flushes before returning.
  void append(const JournalEntry& entry);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::string hash_;
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace elicit::harness
