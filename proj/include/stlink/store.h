// Record ingestion, time-sorted event logs and the on-disk per-user event
// index that the forward scan writes and the linkage step reads.

#ifndef STLINK_STORE_H_
#define STLINK_STORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlink/model.h"

namespace stlink {

// One row of an input CSV, before validation and user prefixing.
struct RawRecord {
  std::string user;
  std::int64_t time = 0;
  std::optional<std::int64_t> duration;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> radius;
  std::optional<std::string> place_id;
  std::size_t line = 0;  // 1-based source line, 0 when not from a file
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParsedRecords {
  std::vector<RawRecord> records;
  std::vector<Diagnostic> diagnostics;
};

// Parses `user,time,lat,lon[,radius][,duration][,place_id]` with a header
// row. Optional columns may appear in any order after the required ones.
// Malformed rows are skipped and reported; a bad header throws InputError.
ParsedRecords ParseRecordsCsv(std::istream& in);
ParsedRecords ReadRecordsCsv(const std::filesystem::path& path);

void WriteRecordsCsv(std::ostream& out, const std::vector<RawRecord>& records);

struct EventLog {
  Side side = Side::kI;
  std::vector<Event> events;  // sorted by (time, user, seq)
  std::size_t record_count = 0;

  bool IsSorted() const;
};

// Orders events by (time, user, seq).
bool EventOrder(const Event& a, const Event& b);

struct IngestOptions {
  double default_radius = 500.0;  // meters
  std::int64_t alpha = 1800;      // stride for period expansion
};

struct IngestResult {
  EventLog log;
  std::vector<Diagnostic> diagnostics;
  std::size_t rejected = 0;
};

// "I:" or "E:" prepended to raw user tokens.
std::string PrefixedUser(Side side, std::string_view raw_user);
std::string_view RawUser(std::string_view prefixed_user);

IngestResult Ingest(const std::vector<RawRecord>& records, Side side,
                    const IngestOptions& options);

// Splits an event with a duration into point events every `alpha` seconds
// plus a closing event at `base.time + duration`. Every output shares the
// base region.
std::vector<Event> ExpandPeriodEvent(const Event& base, std::int64_t duration,
                                     std::int64_t alpha);

// TSV mirror of an event log. Doubles are written in shortest round-trip
// form, so ReadEventLog(WriteEventLog(log)) == log.
void WriteEventLog(const std::filesystem::path& path, const EventLog& log);
EventLog ReadEventLog(const std::filesystem::path& path);

struct IndexedEvent {
  Event event;
  std::uint32_t match_count = 0;

  friend bool operator==(const IndexedEvent&, const IndexedEvent&) = default;
};

// Sort key for the per-user index: user bytes, a NUL separator, then the
// big-endian time and sequence number. Byte order equals scan order.
std::string EncodeIndexKey(std::string_view user, std::int64_t time, std::uint64_t seq);

// Accumulates (event, match count) entries into sorted run files and merges
// them into a single sorted data file on Finalize().
class UserEventIndexWriter {
 public:
  explicit UserEventIndexWriter(std::filesystem::path dir, std::size_t run_limit = 1 << 16);
  UserEventIndexWriter(const UserEventIndexWriter&) = delete;
  UserEventIndexWriter& operator=(const UserEventIndexWriter&) = delete;

  void Put(const Event& event, std::uint32_t match_count);
  void Finalize();

  std::size_t entries() const { return entries_; }
  std::size_t runs_written() const { return runs_written_; }

 private:
  void FlushRun();

  std::filesystem::path dir_;
  std::size_t run_limit_;
  std::vector<std::pair<std::string, std::string>> buffer_;
  std::vector<std::filesystem::path> runs_;
  std::size_t entries_ = 0;
  std::size_t runs_written_ = 0;
  bool finalized_ = false;
};

// Read-only view over a finalized index directory. ScanUser is safe to call
// from several threads at once.
class UserEventIndex {
 public:
  static UserEventIndex Open(const std::filesystem::path& dir);

  UserEventIndex(UserEventIndex&&) noexcept;
  UserEventIndex& operator=(UserEventIndex&&) noexcept;
  UserEventIndex(const UserEventIndex&) = delete;
  UserEventIndex& operator=(const UserEventIndex&) = delete;
  ~UserEventIndex();

  // Time-ascending events of `user`; empty for unknown users.
  std::vector<IndexedEvent> ScanUser(std::string_view user) const;

  std::vector<std::string> Users() const;
  std::size_t size() const { return total_; }

 private:
  struct Extent {
    std::uint64_t offset = 0;
    std::uint64_t bytes = 0;
    std::uint64_t count = 0;
  };

  UserEventIndex() = default;

  int fd_ = -1;
  std::map<std::string, Extent, std::less<>> extents_;
  std::size_t total_ = 0;
};

}  // namespace stlink

#endif  // STLINK_STORE_H_
