#include "tagbell/timetag.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace tagbell {

namespace {

constexpr char kTagMagic[4] = {'B', 'T', 'G', '1'};
constexpr char kScheduleMagic[4] = {'B', 'S', 'C', '1'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kResolutionPs = 0;
constexpr std::size_t kTagHeaderBytes = 24;
constexpr std::size_t kTagRecordBytes = 10;
constexpr std::size_t kScheduleHeaderBytes = 16;
constexpr std::size_t kScheduleRecordBytes = 18;

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return static_cast<T>(v);
}

TimePs checked_time(std::uint64_t raw, std::string_view what, std::size_t index) {
  if (raw > static_cast<std::uint64_t>(std::numeric_limits<TimePs>::max()))
    throw FormatError(std::string(what) + " out of range at index " + std::to_string(index));
  return static_cast<TimePs>(raw);
}

Site decode_site(unsigned code, std::size_t index) {
  if (code == 0) return Site::A;
  if (code == 1) return Site::B;
  throw FormatError("unknown site code " + std::to_string(code) + " at index " + std::to_string(index));
}

Setting decode_setting(unsigned code, std::size_t index) {
  if (code == 1) return Setting::One;
  if (code == 2) return Setting::Two;
  throw FormatError("unknown setting code " + std::to_string(code) + " at index " + std::to_string(index));
}

Site parse_site_text(std::string_view s, std::size_t line) {
  if (s == "A") return Site::A;
  if (s == "B") return Site::B;
  throw FormatError("unknown site code '" + std::string(s) + "' at line " + std::to_string(line));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <typename T>
T parse_int(std::string_view s, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("malformed number '" + std::string(s) + "' at line " + std::to_string(line));
  return value;
}

// Splits text into lines, dropping a trailing '\r' and the final empty line.
std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::vector<DetectionEvent> merged_events(const Run& run) {
  std::vector<DetectionEvent> all;
  all.reserve(run.a.events.size() + run.b.events.size());
  std::merge(run.a.events.begin(), run.a.events.end(), run.b.events.begin(), run.b.events.end(),
             std::back_inserter(all),
             [](const DetectionEvent& x, const DetectionEvent& y) { return x.time_ps < y.time_ps; });
  return all;
}

void split_by_site(const std::vector<DetectionEvent>& all, std::vector<DetectionEvent>& a,
                   std::vector<DetectionEvent>& b) {
  for (const auto& e : all) (e.site == Site::A ? a : b).push_back(e);
}

struct DecodedTags {
  std::vector<DetectionEvent> events;
  std::optional<TimePs> duration;
  std::string epoch_label;
};

DecodedTags decode_tags_binary(std::string_view in) {
  if (in.size() < kTagHeaderBytes)
    throw FormatError("truncated header at byte offset " + std::to_string(in.size()));
  if (!std::equal(std::begin(kTagMagic), std::end(kTagMagic), in.begin()))
    throw FormatError("bad magic, expected BTG1");
  if (auto v = get_le<std::uint16_t>(in, 4); v != kVersion)
    throw FormatError("unsupported version " + std::to_string(v));
  if (auto r = get_le<std::uint16_t>(in, 6); r != kResolutionPs)
    throw FormatError("unsupported resolution code " + std::to_string(r));
  DecodedTags out;
  out.duration = checked_time(get_le<std::uint64_t>(in, 8), "duration", 0);
  const auto count = get_le<std::uint64_t>(in, 16);
  const std::size_t body = in.size() - kTagHeaderBytes;
  const std::size_t complete = body / kTagRecordBytes;
  if (complete < count)
    throw FormatError("truncated record at byte offset " +
                      std::to_string(kTagHeaderBytes + complete * kTagRecordBytes));
  if (complete > count || body % kTagRecordBytes != 0)
    throw FormatError("trailing bytes at byte offset " +
                      std::to_string(kTagHeaderBytes + count * kTagRecordBytes));
  out.events.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = kTagHeaderBytes + i * kTagRecordBytes;
    DetectionEvent e;
    e.time_ps = checked_time(get_le<std::uint64_t>(in, off), "time", i);
    e.site = decode_site(static_cast<unsigned char>(in[off + 8]), i);
    e.setting = decode_setting(static_cast<unsigned char>(in[off + 9]), i);
    if (i > 0 && e.time_ps < out.events.back().time_ps)
      throw FormatError("non-monotonic at index " + std::to_string(i));
    out.events.push_back(e);
  }
  return out;
}

DecodedTags decode_tags_csv(std::string_view in) {
  DecodedTags out;
  bool header_seen = false;
  std::size_t record = 0;
  const auto lines = lines_of(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = lines[n];
    const std::size_t line_no = n + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      for (auto field : split(line.substr(1), ' ')) {
        if (field.starts_with("duration_ps="))
          out.duration = parse_int<TimePs>(field.substr(12), line_no);
        else if (field.starts_with("epoch="))
          out.epoch_label = std::string(field.substr(6));
      }
      continue;
    }
    if (!header_seen) {
      if (line != "time_ps,site,setting") throw FormatError("missing header 'time_ps,site,setting'");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw FormatError("truncated record at line " + std::to_string(line_no));
    DetectionEvent e;
    e.time_ps = parse_int<TimePs>(fields[0], line_no);
    if (e.time_ps < 0) throw FormatError("negative time at line " + std::to_string(line_no));
    e.site = parse_site_text(fields[1], line_no);
    e.setting = decode_setting(parse_int<unsigned>(fields[2], line_no), record);
    if (record > 0 && e.time_ps < out.events.back().time_ps)
      throw FormatError("non-monotonic at index " + std::to_string(record));
    out.events.push_back(e);
    ++record;
  }
  if (!header_seen) throw FormatError("missing header 'time_ps,site,setting'");
  return out;
}

SettingSchedule decode_schedule_binary(std::string_view in) {
  if (in.size() < kScheduleHeaderBytes)
    throw FormatError("truncated schedule header at byte offset " + std::to_string(in.size()));
  if (!std::equal(std::begin(kScheduleMagic), std::end(kScheduleMagic), in.begin()))
    throw FormatError("bad schedule magic, expected BSC1");
  if (auto v = get_le<std::uint16_t>(in, 4); v != kVersion)
    throw FormatError("unsupported schedule version " + std::to_string(v));
  const auto count = get_le<std::uint64_t>(in, 8);
  const std::size_t body = in.size() - kScheduleHeaderBytes;
  const std::size_t complete = body / kScheduleRecordBytes;
  if (complete < count)
    throw FormatError("truncated schedule record at byte offset " +
                      std::to_string(kScheduleHeaderBytes + complete * kScheduleRecordBytes));
  if (complete > count || body % kScheduleRecordBytes != 0)
    throw FormatError("trailing schedule bytes at byte offset " +
                      std::to_string(kScheduleHeaderBytes + count * kScheduleRecordBytes));
  SettingSchedule s;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = kScheduleHeaderBytes + i * kScheduleRecordBytes;
    SettingInterval iv;
    iv.start_ps = checked_time(get_le<std::uint64_t>(in, off), "interval start", i);
    iv.end_ps = checked_time(get_le<std::uint64_t>(in, off + 8), "interval end", i);
    const Site site = decode_site(static_cast<unsigned char>(in[off + 16]), i);
    iv.setting = decode_setting(static_cast<unsigned char>(in[off + 17]), i);
    s.side(site).push_back(iv);
  }
  return s;
}

SettingSchedule decode_schedule_csv(std::string_view in) {
  SettingSchedule s;
  bool header_seen = false;
  std::size_t record = 0;
  const auto lines = lines_of(in);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = lines[n];
    const std::size_t line_no = n + 1;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "start_ps,end_ps,site,setting")
        throw FormatError("missing header 'start_ps,end_ps,site,setting'");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw FormatError("truncated schedule record at line " + std::to_string(line_no));
    SettingInterval iv;
    iv.start_ps = parse_int<TimePs>(fields[0], line_no);
    iv.end_ps = parse_int<TimePs>(fields[1], line_no);
    const Site site = parse_site_text(fields[2], line_no);
    iv.setting = decode_setting(parse_int<unsigned>(fields[3], line_no), record);
    s.side(site).push_back(iv);
    ++record;
  }
  if (!header_seen) throw FormatError("missing header 'start_ps,end_ps,site,setting'");
  return s;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string_view kind_name(ValidationIssue::Kind k) {
  switch (k) {
    case ValidationIssue::Kind::non_monotonic: return "non-monotonic";
    case ValidationIssue::Kind::out_of_range: return "out of range";
    case ValidationIssue::Kind::wrong_site: return "wrong site";
    case ValidationIssue::Kind::schedule_mismatch: return "schedule mismatch";
    case ValidationIssue::Kind::bad_schedule: return "bad schedule";
    case ValidationIssue::Kind::exposure_mismatch: return "exposure mismatch";
  }
  return "unknown";
}

ValidationIssue issue(ValidationIssue::Kind kind, std::size_t index, const std::string& detail) {
  return {kind, index, std::string(kind_name(kind)) + " at index " + std::to_string(index) + ": " + detail};
}

}  // namespace

char site_char(Site s) { return s == Site::A ? 'A' : 'B'; }

std::vector<TimePs> TagStream::times() const {
  std::vector<TimePs> t;
  t.reserve(events.size());
  for (const auto& e : events) t.push_back(e.time_ps);
  return t;
}

std::optional<Setting> SettingSchedule::setting_at(Site s, TimePs t) const {
  const auto& iv = side(s);
  auto it = std::upper_bound(iv.begin(), iv.end(), t,
                             [](TimePs v, const SettingInterval& x) { return v < x.start_ps; });
  if (it == iv.begin()) return std::nullopt;
  --it;
  if (t >= it->end_ps) return std::nullopt;
  return it->setting;
}

std::vector<Segment> segments(const SettingSchedule& schedule) {
  std::vector<Segment> out;
  std::size_t i = 0;
  std::size_t j = 0;
  const auto& a = schedule.a;
  const auto& b = schedule.b;
  while (i < a.size() && j < b.size()) {
    const TimePs lo = std::max(a[i].start_ps, b[j].start_ps);
    const TimePs hi = std::min(a[i].end_ps, b[j].end_ps);
    if (lo < hi) out.push_back({lo, hi, a[i].setting, b[j].setting});
    if (a[i].end_ps < b[j].end_ps)
      ++i;
    else if (b[j].end_ps < a[i].end_ps)
      ++j;
    else {
      ++i;
      ++j;
    }
  }
  return out;
}

Exposure combination_exposure(const SettingSchedule& schedule) {
  Exposure e{};
  for (const auto& seg : segments(schedule))
    e[index_of(seg.a)][index_of(seg.b)] += seg.end_ps - seg.start_ps;
  return e;
}

Run make_run(std::vector<DetectionEvent> a_events, std::vector<DetectionEvent> b_events,
             SettingSchedule schedule, TimePs duration_ps, std::string epoch_label) {
  Run run;
  const Exposure exposure = combination_exposure(schedule);
  run.a = TagStream{Site::A, std::move(a_events), duration_ps, epoch_label, exposure};
  run.b = TagStream{Site::B, std::move(b_events), duration_ps, std::move(epoch_label), exposure};
  run.schedule = std::move(schedule);
  return run;
}

Run slice(const Run& run, TimePs begin, TimePs end) {
  auto cut_events = [&](const std::vector<DetectionEvent>& ev) {
    auto lo = std::lower_bound(ev.begin(), ev.end(), begin,
                               [](const DetectionEvent& e, TimePs t) { return e.time_ps < t; });
    auto hi = std::lower_bound(lo, ev.end(), end,
                               [](const DetectionEvent& e, TimePs t) { return e.time_ps < t; });
    return std::vector<DetectionEvent>(lo, hi);
  };
  auto cut_intervals = [&](const std::vector<SettingInterval>& iv) {
    std::vector<SettingInterval> out;
    for (const auto& x : iv) {
      const TimePs lo = std::max(x.start_ps, begin);
      const TimePs hi = std::min(x.end_ps, end);
      if (lo < hi) out.push_back({lo, hi, x.setting});
    }
    return out;
  };
  SettingSchedule s{cut_intervals(run.schedule.a), cut_intervals(run.schedule.b)};
  return make_run(cut_events(run.a.events), cut_events(run.b.events), std::move(s), end, run.a.epoch_label);
}

TagFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? TagFormat::csv : TagFormat::binary;
}

std::filesystem::path schedule_path(const std::filesystem::path& tags) {
  auto p = tags;
  p += ".schedule";
  return p;
}

std::string encode_tags(const Run& run, TagFormat format) {
  const auto all = merged_events(run);
  std::string out;
  if (format == TagFormat::binary) {
    out.reserve(kTagHeaderBytes + all.size() * kTagRecordBytes);
    out.append(kTagMagic, 4);
    put_le<std::uint16_t>(out, kVersion);
    put_le<std::uint16_t>(out, kResolutionPs);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(run.duration_ps()));
    put_le<std::uint64_t>(out, all.size());
    for (const auto& e : all) {
      put_le<std::uint64_t>(out, static_cast<std::uint64_t>(e.time_ps));
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(e.site));
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(e.setting));
    }
    return out;
  }
  out += "# duration_ps=" + std::to_string(run.duration_ps());
  if (!run.a.epoch_label.empty()) out += " epoch=" + run.a.epoch_label;
  out += "\ntime_ps,site,setting\n";
  for (const auto& e : all) {
    out += std::to_string(e.time_ps);
    out += ',';
    out += site_char(e.site);
    out += ',';
    out += std::to_string(static_cast<int>(e.setting));
    out += '\n';
  }
  return out;
}

std::string encode_schedule(const SettingSchedule& schedule, TagFormat format) {
  std::string out;
  if (format == TagFormat::binary) {
    out.append(kScheduleMagic, 4);
    put_le<std::uint16_t>(out, kVersion);
    put_le<std::uint16_t>(out, 0);
    put_le<std::uint64_t>(out, schedule.a.size() + schedule.b.size());
    for (Site site : {Site::A, Site::B}) {
      for (const auto& iv : schedule.side(site)) {
        put_le<std::uint64_t>(out, static_cast<std::uint64_t>(iv.start_ps));
        put_le<std::uint64_t>(out, static_cast<std::uint64_t>(iv.end_ps));
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(site));
        put_le<std::uint8_t>(out, static_cast<std::uint8_t>(iv.setting));
      }
    }
    return out;
  }
  out += "start_ps,end_ps,site,setting\n";
  for (Site site : {Site::A, Site::B}) {
    for (const auto& iv : schedule.side(site)) {
      out += std::to_string(iv.start_ps) + ',' + std::to_string(iv.end_ps) + ',' + site_char(site) + ',' +
             std::to_string(static_cast<int>(iv.setting)) + '\n';
    }
  }
  return out;
}

Run decode_tags(std::string_view tags, std::optional<std::string_view> schedule_text, TagFormat format) {
  DecodedTags decoded = format == TagFormat::binary ? decode_tags_binary(tags) : decode_tags_csv(tags);
  SettingSchedule schedule;
  if (schedule_text)
    schedule = format == TagFormat::binary ? decode_schedule_binary(*schedule_text)
                                           : decode_schedule_csv(*schedule_text);
  TimePs duration = 0;
  if (decoded.duration) {
    duration = *decoded.duration;
  } else {
    if (!decoded.events.empty()) duration = decoded.events.back().time_ps;
    for (Site s : {Site::A, Site::B})
      if (!schedule.side(s).empty()) duration = std::max(duration, schedule.side(s).back().end_ps);
  }
  std::vector<DetectionEvent> a;
  std::vector<DetectionEvent> b;
  split_by_site(decoded.events, a, b);
  Run run = make_run(std::move(a), std::move(b), std::move(schedule), duration, std::move(decoded.epoch_label));
  for (Site s : {Site::A, Site::B}) {
    auto report = validate_stream(run.stream(s), run.schedule);
    if (!report.empty())
      throw ValidationError(std::string("stream ") + site_char(s) + ": " + report.front().message);
  }
  return run;
}

Run read_tags(const std::filesystem::path& path, TagFormat format) {
  const std::string tags = read_file(path);
  const auto sched_path = schedule_path(path);
  std::optional<std::string> sched;
  if (std::filesystem::exists(sched_path)) sched = read_file(sched_path);
  return decode_tags(tags, sched ? std::optional<std::string_view>(*sched) : std::nullopt, format);
}

void write_tags(const Run& run, const std::filesystem::path& path, TagFormat format) {
  write_file(path, encode_tags(run, format));
  write_file(schedule_path(path), encode_schedule(run.schedule, format));
}

ValidationReport validate_schedule(const SettingSchedule& schedule, TimePs duration_ps) {
  ValidationReport report;
  if (schedule.empty()) return report;
  for (Site site : {Site::A, Site::B}) {
    const auto& iv = schedule.side(site);
    const std::string side = std::string("site ") + site_char(site);
    if (iv.empty()) {
      report.push_back(issue(ValidationIssue::Kind::bad_schedule, 0, side + " has no intervals"));
      continue;
    }
    TimePs expected = 0;
    for (std::size_t i = 0; i < iv.size(); ++i) {
      if (iv[i].start_ps != expected)
        report.push_back(issue(ValidationIssue::Kind::bad_schedule, i,
                               side + " interval starts at " + std::to_string(iv[i].start_ps) +
                                   ", expected " + std::to_string(expected)));
      if (iv[i].end_ps <= iv[i].start_ps)
        report.push_back(issue(ValidationIssue::Kind::bad_schedule, i, side + " interval is empty"));
      expected = iv[i].end_ps;
    }
    if (expected != duration_ps)
      report.push_back(issue(ValidationIssue::Kind::bad_schedule, iv.size() - 1,
                             side + " ends at " + std::to_string(expected) + ", duration is " +
                                 std::to_string(duration_ps)));
  }
  return report;
}

ValidationReport validate_stream(const TagStream& stream, const SettingSchedule& schedule) {
  ValidationReport report = validate_schedule(schedule, stream.duration_ps);
  const bool check_schedule = !schedule.side(stream.site).empty();
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const auto& e = stream.events[i];
    if (i > 0 && e.time_ps < stream.events[i - 1].time_ps)
      report.push_back(issue(ValidationIssue::Kind::non_monotonic, i,
                             std::to_string(e.time_ps) + " < " + std::to_string(stream.events[i - 1].time_ps)));
    if (e.time_ps < 0 || e.time_ps > stream.duration_ps)
      report.push_back(issue(ValidationIssue::Kind::out_of_range, i,
                             "time " + std::to_string(e.time_ps) + " outside [0, " +
                                 std::to_string(stream.duration_ps) + "]"));
    if (e.site != stream.site)
      report.push_back(issue(ValidationIssue::Kind::wrong_site, i, "event site differs from stream site"));
    if (check_schedule) {
      const auto scheduled = schedule.setting_at(stream.site, e.time_ps);
      if (!scheduled)
        report.push_back(issue(ValidationIssue::Kind::schedule_mismatch, i,
                               "time " + std::to_string(e.time_ps) + " not covered by the schedule"));
      else if (*scheduled != e.setting)
        report.push_back(issue(ValidationIssue::Kind::schedule_mismatch, i,
                               "setting " + std::to_string(static_cast<int>(e.setting)) +
                                   " inside a setting-" + std::to_string(static_cast<int>(*scheduled)) +
                                   " interval"));
    }
  }
  if (!schedule.empty()) {
    TimePs total = 0;
    for (const auto& row : stream.exposure)
      for (TimePs x : row) total += x;
    if (total != stream.duration_ps)
      report.push_back(issue(ValidationIssue::Kind::exposure_mismatch, 0,
                             "exposures sum to " + std::to_string(total) + ", duration is " +
                                 std::to_string(stream.duration_ps)));
  }
  return report;
}

}  // namespace tagbell
