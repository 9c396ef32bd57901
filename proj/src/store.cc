#include "stlink/store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <queue>
#include <sstream>
#include <system_error>

namespace stlink {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kRunMagic = "STLRUN1\n";
constexpr std::string_view kUsersMagic = "STLUSR1\n";
constexpr std::string_view kDataFile = "index.dat";
constexpr std::string_view kUsersFile = "users.idx";

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

// Splits one CSV line; supports double-quoted fields with "" escapes.
bool SplitCsvLine(std::string_view line, std::vector<std::string>* fields) {
  fields->clear();
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields->push_back(Trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields->push_back(Trim(cur));
  return !quoted;
}

template <typename T>
bool ParseNumber(std::string_view text, T* out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, *out);
  return ec == std::errc() && ptr == end;
}

std::string FormatDouble(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

bool ValidUserToken(std::string_view user) {
  if (user.empty()) return false;
  return user.find_first_of(std::string_view("\t\n\r\0", 4)) == std::string_view::npos;
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string* out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t GetU32(std::string_view in, std::size_t* pos) {
  if (*pos + 4 > in.size()) throw PipelineError("index record truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(in[(*pos)++]);
  return v;
}

std::uint64_t GetU64(std::string_view in, std::size_t* pos) {
  if (*pos + 8 > in.size()) throw PipelineError("index record truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | static_cast<unsigned char>(in[(*pos)++]);
  return v;
}

void PutF64(std::string* out, double v) { PutU64(out, std::bit_cast<std::uint64_t>(v)); }

double GetF64(std::string_view in, std::size_t* pos) {
  return std::bit_cast<double>(GetU64(in, pos));
}

std::string EncodeIndexValue(const Event& event, std::uint32_t match_count) {
  std::string v;
  v.push_back(static_cast<char>(event.side));
  PutF64(&v, event.region.lat);
  PutF64(&v, event.region.lon);
  PutF64(&v, event.region.radius);
  if (event.region.place_id) {
    v.push_back(1);
    PutU32(&v, static_cast<std::uint32_t>(event.region.place_id->size()));
    v += *event.region.place_id;
  } else {
    v.push_back(0);
  }
  PutU32(&v, match_count);
  return v;
}

IndexedEvent DecodeIndexEntry(std::string_view key, std::string_view value) {
  IndexedEvent out;
  const std::size_t sep = key.find('\0');
  if (sep == std::string_view::npos || key.size() != sep + 17) {
    throw PipelineError("corrupt index key");
  }
  out.event.user = std::string(key.substr(0, sep));
  std::size_t kpos = sep + 1;
  out.event.time = static_cast<std::int64_t>(GetU64(key, &kpos));
  out.event.seq = GetU64(key, &kpos);

  std::size_t pos = 0;
  if (value.empty()) throw PipelineError("corrupt index value");
  out.event.side = static_cast<Side>(value[pos++]);
  out.event.region.lat = GetF64(value, &pos);
  out.event.region.lon = GetF64(value, &pos);
  out.event.region.radius = GetF64(value, &pos);
  if (pos >= value.size()) throw PipelineError("corrupt index value");
  if (value[pos++] != 0) {
    const std::uint32_t len = GetU32(value, &pos);
    if (pos + len > value.size()) throw PipelineError("corrupt index value");
    out.event.region.place_id = std::string(value.substr(pos, len));
    pos += len;
  }
  out.match_count = GetU32(value, &pos);
  return out;
}

void WriteEntry(std::ostream& out, std::string_view key, std::string_view value) {
  std::string header;
  PutU32(&header, static_cast<std::uint32_t>(key.size()));
  PutU32(&header, static_cast<std::uint32_t>(value.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(key.data(), static_cast<std::streamsize>(key.size()));
  out.write(value.data(), static_cast<std::streamsize>(value.size()));
}

// Sequential reader over one sorted run file.
class RunReader {
 public:
  explicit RunReader(const fs::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw PipelineError("cannot open run file " + path.string());
    std::string magic(kRunMagic.size(), '\0');
    in_.read(magic.data(), static_cast<std::streamsize>(magic.size()));
    if (magic != kRunMagic) throw PipelineError("bad run file header in " + path.string());
    Advance();
  }

  bool done() const { return done_; }
  const std::string& key() const { return key_; }
  const std::string& value() const { return value_; }

  void Advance() {
    std::array<char, 8> header;
    in_.read(header.data(), header.size());
    if (in_.gcount() == 0) {
      done_ = true;
      return;
    }
    if (in_.gcount() != 8) throw PipelineError("truncated run file");
    std::size_t pos = 0;
    const std::string_view hv(header.data(), header.size());
    const std::uint32_t klen = GetU32(hv, &pos);
    const std::uint32_t vlen = GetU32(hv, &pos);
    key_.resize(klen);
    value_.resize(vlen);
    in_.read(key_.data(), klen);
    in_.read(value_.data(), vlen);
    if (!in_) throw PipelineError("truncated run file");
  }

 private:
  std::ifstream in_;
  std::string key_;
  std::string value_;
  bool done_ = false;
};

}  // namespace

ParsedRecords ParseRecordsCsv(std::istream& in) {
  ParsedRecords out;
  std::string line;
  std::vector<std::string> fields;
  std::size_t line_no = 0;

  // Header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) break;
  }
  if (line_no == 0 || Trim(line).empty()) throw InputError("CSV input is empty (header row required)");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  SplitCsvLine(line, &fields);
  int col_user = -1, col_time = -1, col_lat = -1, col_lon = -1;
  int col_radius = -1, col_duration = -1, col_place = -1;
  for (int c = 0; c < static_cast<int>(fields.size()); ++c) {
    const std::string& name = fields[c];
    int* slot = nullptr;
    if (name == "user") slot = &col_user;
    else if (name == "time") slot = &col_time;
    else if (name == "lat") slot = &col_lat;
    else if (name == "lon") slot = &col_lon;
    else if (name == "radius") slot = &col_radius;
    else if (name == "duration") slot = &col_duration;
    else if (name == "place_id") slot = &col_place;
    else throw InputError("unknown CSV column '" + name + "'");
    if (*slot != -1) throw InputError("duplicate CSV column '" + name + "'");
    *slot = c;
  }
  if (col_user < 0 || col_time < 0 || col_lat < 0 || col_lon < 0) {
    throw InputError("CSV header must contain user,time,lat,lon");
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    auto reject = [&](std::string message) {
      out.diagnostics.push_back({line_no, std::move(message)});
    };
    if (!SplitCsvLine(line, &fields)) {
      reject("unterminated quoted field");
      continue;
    }
    if (fields.size() != static_cast<std::size_t>(std::max(
                              {col_user, col_time, col_lat, col_lon, col_radius, col_duration,
                               col_place}) + 1)) {
      reject("expected " + std::to_string(std::max({col_user, col_time, col_lat, col_lon,
                                                    col_radius, col_duration, col_place}) + 1) +
             " fields, got " + std::to_string(fields.size()));
      continue;
    }
    RawRecord rec;
    rec.line = line_no;
    rec.user = fields[col_user];
    if (!ParseNumber(fields[col_time], &rec.time)) {
      reject("bad time '" + fields[col_time] + "'");
      continue;
    }
    if (!ParseNumber(fields[col_lat], &rec.lat) || !ParseNumber(fields[col_lon], &rec.lon)) {
      reject("bad coordinate");
      continue;
    }
    if (col_radius >= 0 && !fields[col_radius].empty()) {
      double r = 0.0;
      if (!ParseNumber(fields[col_radius], &r)) {
        reject("bad radius '" + fields[col_radius] + "'");
        continue;
      }
      rec.radius = r;
    }
    if (col_duration >= 0 && !fields[col_duration].empty()) {
      std::int64_t d = 0;
      if (!ParseNumber(fields[col_duration], &d)) {
        reject("bad duration '" + fields[col_duration] + "'");
        continue;
      }
      rec.duration = d;
    }
    if (col_place >= 0 && !fields[col_place].empty()) rec.place_id = fields[col_place];
    out.records.push_back(std::move(rec));
  }
  return out;
}

ParsedRecords ReadRecordsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input " + path.string());
  return ParseRecordsCsv(in);
}

void WriteRecordsCsv(std::ostream& out, const std::vector<RawRecord>& records) {
  out << "user,time,lat,lon,radius,duration,place_id\n";
  for (const RawRecord& r : records) {
    out << CsvField(r.user) << ',' << r.time << ',' << FormatDouble(r.lat) << ','
        << FormatDouble(r.lon) << ',';
    if (r.radius) out << FormatDouble(*r.radius);
    out << ',';
    if (r.duration) out << *r.duration;
    out << ',';
    if (r.place_id) out << CsvField(*r.place_id);
    out << '\n';
  }
}

bool EventOrder(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.user != b.user) return a.user < b.user;
  return a.seq < b.seq;
}

bool EventLog::IsSorted() const { return std::is_sorted(events.begin(), events.end(), EventOrder); }

std::string PrefixedUser(Side side, std::string_view raw_user) {
  std::string out(SideName(side));
  out.push_back(':');
  out.append(raw_user);
  return out;
}

std::string_view RawUser(std::string_view prefixed_user) {
  if (prefixed_user.size() >= 2 && prefixed_user[1] == ':' &&
      (prefixed_user[0] == 'I' || prefixed_user[0] == 'E')) {
    return prefixed_user.substr(2);
  }
  return prefixed_user;
}

std::vector<Event> ExpandPeriodEvent(const Event& base, std::int64_t duration,
                                     std::int64_t alpha) {
  if (duration < 0) throw std::invalid_argument("duration must be >= 0");
  if (alpha <= 0) throw std::invalid_argument("alpha must be > 0");
  std::vector<Event> out;
  std::int64_t offset = 0;
  for (; offset <= duration; offset += alpha) {
    Event ev = base;
    ev.time = base.time + offset;
    out.push_back(std::move(ev));
  }
  if (offset - alpha != duration) {
    Event ev = base;
    ev.time = base.time + duration;
    out.push_back(std::move(ev));
  }
  return out;
}

IngestResult Ingest(const std::vector<RawRecord>& records, Side side,
                    const IngestOptions& options) {
  IngestResult result;
  result.log.side = side;
  std::uint64_t next_seq = 0;
  for (const RawRecord& rec : records) {
    auto reject = [&](std::string message) {
      result.diagnostics.push_back({rec.line, std::move(message)});
      ++result.rejected;
    };
    if (!ValidUserToken(rec.user)) {
      reject("empty user or user containing control characters");
      continue;
    }
    if (rec.time < 0) {
      reject("negative time");
      continue;
    }
    if (rec.duration && *rec.duration < 0) {
      reject("negative duration");
      continue;
    }
    Event base;
    base.user = PrefixedUser(side, rec.user);
    base.side = side;
    base.time = rec.time;
    base.region.lat = rec.lat;
    base.region.lon = rec.lon;
    base.region.radius = rec.radius.value_or(options.default_radius);
    base.region.place_id = rec.place_id;
    if (!base.region.IsValid()) {
      reject("coordinate or radius out of range");
      continue;
    }
    ++result.log.record_count;
    if (rec.duration && *rec.duration > 0) {
      for (Event& ev : ExpandPeriodEvent(base, *rec.duration, options.alpha)) {
        ev.seq = next_seq++;
        result.log.events.push_back(std::move(ev));
      }
    } else {
      base.seq = next_seq++;
      result.log.events.push_back(std::move(base));
    }
  }
  std::sort(result.log.events.begin(), result.log.events.end(), EventOrder);
  return result;
}

void WriteEventLog(const fs::path& path, const EventLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError("cannot write event log " + path.string());
  out << "# stlink-events side=" << SideName(log.side) << " records=" << log.record_count
      << " events=" << log.events.size() << '\n';
  out << "seq\tuser\ttime\tlat\tlon\tradius\tplace_id\n";
  for (const Event& ev : log.events) {
    out << ev.seq << '\t' << ev.user << '\t' << ev.time << '\t' << FormatDouble(ev.region.lat)
        << '\t' << FormatDouble(ev.region.lon) << '\t' << FormatDouble(ev.region.radius) << '\t';
    if (ev.region.place_id) out << *ev.region.place_id;
    out << '\n';
  }
  if (!out) throw PipelineError("failed writing event log " + path.string());
}

EventLog ReadEventLog(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot open event log " + path.string());
  EventLog log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# stlink-events", 0) != 0) {
    throw PipelineError("not an event log: " + path.string());
  }
  {
    std::istringstream meta(line.substr(16));
    std::string token;
    while (meta >> token) {
      if (token.rfind("side=", 0) == 0) log.side = ParseSide(token.substr(5));
      if (token.rfind("records=", 0) == 0) log.record_count = std::stoull(token.substr(8));
    }
  }
  std::getline(in, line);  // column header
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::array<std::string_view, 7> cols;
    std::size_t start = 0;
    std::size_t n = 0;
    for (; n < cols.size(); ++n) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        cols[n] = std::string_view(line).substr(start);
        ++n;
        break;
      }
      cols[n] = std::string_view(line).substr(start, tab - start);
      start = tab + 1;
    }
    Event ev;
    ev.side = log.side;
    if (n != cols.size() || !ParseNumber(cols[0], &ev.seq) || !ParseNumber(cols[2], &ev.time) ||
        !ParseNumber(cols[3], &ev.region.lat) || !ParseNumber(cols[4], &ev.region.lon) ||
        !ParseNumber(cols[5], &ev.region.radius)) {
      throw PipelineError(path.string() + ":" + std::to_string(line_no) + ": malformed event row");
    }
    ev.user = std::string(cols[1]);
    if (!cols[6].empty()) ev.region.place_id = std::string(cols[6]);
    log.events.push_back(std::move(ev));
  }
  if (!log.IsSorted()) throw PipelineError("event log not time-sorted: " + path.string());
  return log;
}

std::string EncodeIndexKey(std::string_view user, std::int64_t time, std::uint64_t seq) {
  std::string key(user);
  key.push_back('\0');
  PutU64(&key, static_cast<std::uint64_t>(time));
  PutU64(&key, seq);
  return key;
}

UserEventIndexWriter::UserEventIndexWriter(fs::path dir, std::size_t run_limit)
    : dir_(std::move(dir)), run_limit_(std::max<std::size_t>(1, run_limit)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw PipelineError("cannot create index directory " + dir_.string());
  fs::remove(dir_ / kDataFile, ec);
  fs::remove(dir_ / kUsersFile, ec);
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".run") fs::remove(entry.path(), ec);
  }
}

void UserEventIndexWriter::Put(const Event& event, std::uint32_t match_count) {
  if (finalized_) throw PipelineError("index already finalized");
  buffer_.emplace_back(EncodeIndexKey(event.user, event.time, event.seq),
                       EncodeIndexValue(event, match_count));
  ++entries_;
  if (buffer_.size() >= run_limit_) FlushRun();
}

void UserEventIndexWriter::FlushRun() {
  if (buffer_.empty()) return;
  std::sort(buffer_.begin(), buffer_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  char name[32];
  std::snprintf(name, sizeof(name), "run-%06zu.run", runs_written_);
  const fs::path path = dir_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError("cannot write run file " + path.string());
  out.write(kRunMagic.data(), static_cast<std::streamsize>(kRunMagic.size()));
  for (const auto& [key, value] : buffer_) WriteEntry(out, key, value);
  if (!out) throw PipelineError("failed writing run file " + path.string());
  runs_.push_back(path);
  ++runs_written_;
  buffer_.clear();
}

void UserEventIndexWriter::Finalize() {
  if (finalized_) return;
  FlushRun();
  finalized_ = true;

  std::vector<std::unique_ptr<RunReader>> readers;
  for (const fs::path& run : runs_) readers.push_back(std::make_unique<RunReader>(run));
  auto greater = [&](std::size_t a, std::size_t b) {
    return readers[a]->key() > readers[b]->key();
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(greater)> heap(greater);
  for (std::size_t r = 0; r < readers.size(); ++r) {
    if (!readers[r]->done()) heap.push(r);
  }

  const fs::path data_path = dir_ / kDataFile;
  std::ofstream data(data_path, std::ios::binary | std::ios::trunc);
  if (!data) throw PipelineError("cannot write " + data_path.string());
  std::string users_blob(kUsersMagic);
  std::string current_user;
  std::uint64_t user_offset = 0;
  std::uint64_t user_count = 0;
  std::uint64_t offset = 0;
  std::string last_key;
  auto close_user = [&] {
    if (user_count == 0) return;
    PutU32(&users_blob, static_cast<std::uint32_t>(current_user.size()));
    users_blob += current_user;
    PutU64(&users_blob, user_offset);
    PutU64(&users_blob, offset - user_offset);
    PutU64(&users_blob, user_count);
  };

  while (!heap.empty()) {
    const std::size_t r = heap.top();
    heap.pop();
    const std::string& key = readers[r]->key();
    if (!last_key.empty() && key == last_key) {
      throw PipelineError("duplicate index key for user " + key.substr(0, key.find('\0')));
    }
    const std::string_view user(key.data(), key.find('\0'));
    if (user_count == 0 || user != current_user) {
      close_user();
      current_user = std::string(user);
      user_offset = offset;
      user_count = 0;
    }
    WriteEntry(data, key, readers[r]->value());
    offset += 8 + key.size() + readers[r]->value().size();
    ++user_count;
    last_key = key;
    readers[r]->Advance();
    if (!readers[r]->done()) heap.push(r);
  }
  close_user();
  data.close();
  if (!data) throw PipelineError("failed writing " + data_path.string());

  readers.clear();
  std::error_code ec;
  for (const fs::path& run : runs_) fs::remove(run, ec);
  runs_.clear();

  // users.idx is written last; its presence marks a finalized index.
  const fs::path users_path = dir_ / kUsersFile;
  std::ofstream users(users_path, std::ios::binary | std::ios::trunc);
  users.write(users_blob.data(), static_cast<std::streamsize>(users_blob.size()));
  if (!users) throw PipelineError("failed writing " + users_path.string());
}

UserEventIndex UserEventIndex::Open(const fs::path& dir) {
  UserEventIndex index;
  std::ifstream users(dir / kUsersFile, std::ios::binary);
  if (!users) throw PipelineError("index not finalized (missing users.idx) in " + dir.string());
  const std::string blob((std::istreambuf_iterator<char>(users)), std::istreambuf_iterator<char>());
  if (blob.compare(0, kUsersMagic.size(), kUsersMagic) != 0) {
    throw PipelineError("bad users.idx header in " + dir.string());
  }
  std::size_t pos = kUsersMagic.size();
  while (pos < blob.size()) {
    const std::uint32_t len = GetU32(blob, &pos);
    if (pos + len > blob.size()) throw PipelineError("corrupt users.idx");
    std::string user = blob.substr(pos, len);
    pos += len;
    Extent extent;
    extent.offset = GetU64(blob, &pos);
    extent.bytes = GetU64(blob, &pos);
    extent.count = GetU64(blob, &pos);
    index.total_ += extent.count;
    index.extents_.emplace(std::move(user), extent);
  }
  const fs::path data_path = dir / kDataFile;
  index.fd_ = ::open(data_path.c_str(), O_RDONLY | O_CLOEXEC);
  if (index.fd_ < 0) throw PipelineError("cannot open " + data_path.string());
  return index;
}

UserEventIndex::UserEventIndex(UserEventIndex&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)),
      extents_(std::move(other.extents_)),
      total_(other.total_) {}

UserEventIndex& UserEventIndex::operator=(UserEventIndex&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    extents_ = std::move(other.extents_);
    total_ = other.total_;
  }
  return *this;
}

UserEventIndex::~UserEventIndex() {
  if (fd_ >= 0) ::close(fd_);
}

std::vector<IndexedEvent> UserEventIndex::ScanUser(std::string_view user) const {
  std::vector<IndexedEvent> out;
  const auto it = extents_.find(user);
  if (it == extents_.end()) return out;
  const Extent& extent = it->second;
  std::string buf(extent.bytes, '\0');
  std::size_t done = 0;
  while (done < buf.size()) {
    const ssize_t n = ::pread(fd_, buf.data() + done, buf.size() - done,
                              static_cast<off_t>(extent.offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw PipelineError("index read failed for user " + std::string(user));
    done += static_cast<std::size_t>(n);
  }
  out.reserve(extent.count);
  std::size_t pos = 0;
  const std::string_view view(buf);
  while (pos < view.size()) {
    const std::uint32_t klen = GetU32(view, &pos);
    const std::uint32_t vlen = GetU32(view, &pos);
    if (pos + klen + vlen > view.size()) throw PipelineError("corrupt index data");
    out.push_back(DecodeIndexEntry(view.substr(pos, klen), view.substr(pos + klen, vlen)));
    pos += klen + vlen;
  }
  return out;
}

std::vector<std::string> UserEventIndex::Users() const {
  std::vector<std::string> out;
  out.reserve(extents_.size());
  for (const auto& [user, extent] : extents_) out.push_back(user);
  return out;
}

}  // namespace stlink
