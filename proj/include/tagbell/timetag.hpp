// Time-tag data model, on-disk formats and stream validation.
//
// All times are integer picoseconds since the run epoch. A run holds one
// stream per site plus the explicit setting schedule for both sites.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tagbell {

using TimePs = std::int64_t;

enum class Site : std::uint8_t { A = 0, B = 1 };
enum class Setting : std::uint8_t { One = 1, Two = 2 };

constexpr std::size_t index_of(Setting s) { return s == Setting::One ? 0 : 1; }
constexpr Setting setting_from_index(std::size_t i) { return i == 0 ? Setting::One : Setting::Two; }
char site_char(Site s);

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Malformed file content (truncation, bad codes, ordering).
class FormatError : public Error {
 public:
  using Error::Error;
};
// Inputs that parse but violate a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};
// Files that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

struct DetectionEvent {
  TimePs time_ps = 0;
  Site site = Site::A;
  Setting setting = Setting::One;

  friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

// Measurement time per setting combination, indexed [a][b].
using Exposure = std::array<std::array<TimePs, 2>, 2>;

struct TagStream {
  Site site = Site::A;
  std::vector<DetectionEvent> events;
  TimePs duration_ps = 0;
  std::string epoch_label;
  Exposure exposure{};

  static TagStream empty(Site s) {
    TagStream t;
    t.site = s;
    return t;
  }
  std::vector<TimePs> times() const;
  friend bool operator==(const TagStream&, const TagStream&) = default;
};

struct SettingInterval {
  TimePs start_ps = 0;
  TimePs end_ps = 0;
  Setting setting = Setting::One;

  friend bool operator==(const SettingInterval&, const SettingInterval&) = default;
};

// Per-site setting intervals; each side tiles [0, duration) contiguously.
struct SettingSchedule {
  std::vector<SettingInterval> a;
  std::vector<SettingInterval> b;

  const std::vector<SettingInterval>& side(Site s) const { return s == Site::A ? a : b; }
  std::vector<SettingInterval>& side(Site s) { return s == Site::A ? a : b; }
  bool empty() const { return a.empty() && b.empty(); }
  std::optional<Setting> setting_at(Site s, TimePs t) const;

  friend bool operator==(const SettingSchedule&, const SettingSchedule&) = default;
};

// A maximal time range over which both sides' settings are constant.
struct Segment {
  TimePs start_ps = 0;
  TimePs end_ps = 0;
  Setting a = Setting::One;
  Setting b = Setting::One;
};

// Intersection of the two sides' setting intervals, in time order.
std::vector<Segment> segments(const SettingSchedule& schedule);
Exposure combination_exposure(const SettingSchedule& schedule);

struct Run {
  TagStream a = TagStream::empty(Site::A);
  TagStream b = TagStream::empty(Site::B);
  SettingSchedule schedule;

  TimePs duration_ps() const { return a.duration_ps; }
  const TagStream& stream(Site s) const { return s == Site::A ? a : b; }
  friend bool operator==(const Run&, const Run&) = default;
};

// Builds a run from per-site events, filling durations and exposures.
Run make_run(std::vector<DetectionEvent> a_events, std::vector<DetectionEvent> b_events,
             SettingSchedule schedule, TimePs duration_ps, std::string epoch_label = {});

// Events and schedule restricted to [begin, end). Times are not rebased.
Run slice(const Run& run, TimePs begin, TimePs end);

enum class TagFormat { binary, csv };

// Guesses the format from the extension: ".csv" is csv, anything else binary.
TagFormat format_for(const std::filesystem::path& path);
// Sidecar holding the setting schedule of a tag file.
std::filesystem::path schedule_path(const std::filesystem::path& tags);

// Reads a tag file and its schedule sidecar (if present) and validates them.
Run read_tags(const std::filesystem::path& path, TagFormat format);
void write_tags(const Run& run, const std::filesystem::path& path, TagFormat format);

// In-memory codecs behind read_tags/write_tags.
std::string encode_tags(const Run& run, TagFormat format);
std::string encode_schedule(const SettingSchedule& schedule, TagFormat format);
Run decode_tags(std::string_view tags, std::optional<std::string_view> schedule, TagFormat format);

struct ValidationIssue {
  enum class Kind { non_monotonic, out_of_range, wrong_site, schedule_mismatch, bad_schedule, exposure_mismatch };
  Kind kind;
  std::size_t index = 0;  // event or interval index the issue refers to
  std::string message;

  friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};
using ValidationReport = std::vector<ValidationIssue>;

// Checks ordering, range, and schedule consistency. Empty report means valid.
ValidationReport validate_stream(const TagStream& stream, const SettingSchedule& schedule);
ValidationReport validate_schedule(const SettingSchedule& schedule, TimePs duration_ps);

}  // namespace tagbell
