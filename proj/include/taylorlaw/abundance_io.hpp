#ifndef TAYLORLAW_ABUNDANCE_IO_HPP
#define TAYLORLAW_ABUNDANCE_IO_HPP

// Species-abundance tables: cross-sectional (subject x species), longitudinal
// ((subject, time) x species) and location-indexed (species x location).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "taylorlaw/csv.hpp"
#include "taylorlaw/error.hpp"

namespace taylorlaw {

/// A time label: either an ISO-8601 calendar date or a non-negative index.
struct TimeLabel {
  enum class Kind { index, date };

  Kind kind = Kind::index;
  std::int64_t value = 0;  // index, or days since 1970-01-01 for dates
  std::string text;        // label exactly as written

  friend bool operator==(const TimeLabel&, const TimeLabel&) = default;
};

namespace detail {

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

/// Parses "YYYY-MM-DD" or a non-negative integer; nullopt otherwise.
inline std::optional<TimeLabel> parse_time_label(std::string_view s) {
  s = csv::trim(s);
  if (detail::all_digits(s)) {
    if (s.size() > 18) return std::nullopt;
    return TimeLabel{TimeLabel::Kind::index, std::stoll(std::string(s)), std::string(s)};
  }
  if (s.size() == 10 && s[4] == '-' && s[7] == '-' && detail::all_digits(s.substr(0, 4)) &&
      detail::all_digits(s.substr(5, 2)) && detail::all_digits(s.substr(8, 2))) {
    using namespace std::chrono;
    const year_month_day ymd{year{std::stoi(std::string(s.substr(0, 4)))},
                             month{static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))))},
                             day{static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))))}};
    if (!ymd.ok()) return std::nullopt;
    return TimeLabel{TimeLabel::Kind::date, sys_days{ymd}.time_since_epoch().count(), std::string(s)};
  }
  return std::nullopt;
}

/// Dense count matrix, one row per (subject[, time]) observation and one
/// column per species. Instances are validated on construction and immutable.
class AbundanceTable {
 public:
  /// Validates every invariant; throws ParseError naming the offending
  /// row or column.
  static AbundanceTable create(std::vector<std::string> row_subjects, std::vector<std::string> species_ids,
                               std::optional<std::vector<TimeLabel>> times, std::vector<double> counts) {
    AbundanceTable t;
    t.row_subjects_ = std::move(row_subjects);
    t.species_ids_ = std::move(species_ids);
    t.times_ = std::move(times);
    t.counts_ = std::move(counts);
    t.validate();
    return t;
  }

  std::size_t rows() const noexcept { return row_subjects_.size(); }
  std::size_t cols() const noexcept { return species_ids_.size(); }
  bool has_times() const noexcept { return times_.has_value(); }

  const std::vector<std::string>& species_ids() const noexcept { return species_ids_; }
  const std::vector<std::string>& row_subjects() const noexcept { return row_subjects_; }
  const std::optional<std::vector<TimeLabel>>& times() const noexcept { return times_; }
  const std::vector<double>& counts() const noexcept { return counts_; }

  /// Distinct subjects in order of first appearance.
  const std::vector<std::string>& subject_ids() const noexcept { return subject_ids_; }

  const std::string& row_subject(std::size_t r) const { return row_subjects_.at(r); }
  double at(std::size_t r, std::size_t c) const { return counts_.at(r * cols() + c); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(counts_).subspan(r * cols(), cols());
  }

  /// Rows belonging to one subject, in time order.
  std::vector<std::size_t> rows_of(const std::string& subject) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rows(); ++r)
      if (row_subjects_[r] == subject) out.push_back(r);
    return out;
  }

  bool has_subject(const std::string& subject) const {
    return std::find(subject_ids_.begin(), subject_ids_.end(), subject) != subject_ids_.end();
  }

  /// Numeric time of a row: the index itself, or days elapsed since the
  /// subject's first observation for calendar dates.
  std::int64_t time_offset(std::size_t r) const {
    if (!times_) throw UsageError("table has no time column");
    const auto& t = (*times_).at(r);
    if (t.kind == TimeLabel::Kind::index) return t.value;
    const auto first = rows_of(row_subjects_[r]).front();
    return t.value - (*times_)[first].value;
  }

  /// Label identifying a row: subject, plus "@time" when timed.
  std::string row_label(std::size_t r) const {
    if (!times_) return row_subjects_.at(r);
    return row_subjects_.at(r) + "@" + (*times_).at(r).text;
  }

  friend bool operator==(const AbundanceTable& a, const AbundanceTable& b) {
    return a.row_subjects_ == b.row_subjects_ && a.species_ids_ == b.species_ids_ && a.times_ == b.times_ &&
           a.counts_ == b.counts_;
  }

 private:
  AbundanceTable() = default;

  void validate() {
    if (row_subjects_.empty()) throw ParseError("no observations");
    if (species_ids_.empty()) throw ParseError("no species columns");
    std::set<std::string> seen_species;
    for (const auto& s : species_ids_) {
      if (s.empty()) throw ParseError("empty species identifier");
      if (!seen_species.insert(s).second) throw ParseError("duplicate species column '" + s + "'");
    }
    if (counts_.size() != rows() * cols()) throw ParseError("count matrix does not match table dimensions");
    for (std::size_t r = 0; r < rows(); ++r) {
      if (row_subjects_[r].empty()) throw ParseError("row " + std::to_string(r + 1) + ": empty subject_id");
      for (std::size_t c = 0; c < cols(); ++c) {
        const double v = counts_[r * cols() + c];
        if (!std::isfinite(v) || v < 0.0) {
          throw ParseError("row " + std::to_string(r + 1) + ", column '" + species_ids_[c] +
                           "': count must be finite and non-negative");
        }
      }
    }

    subject_ids_.clear();
    if (!times_) {
      std::set<std::string> seen;
      for (std::size_t r = 0; r < rows(); ++r) {
        if (!seen.insert(row_subjects_[r]).second)
          throw ParseError("row " + std::to_string(r + 1) + ": duplicate subject_id '" + row_subjects_[r] + "'");
        subject_ids_.push_back(row_subjects_[r]);
      }
      return;
    }

    if (times_->size() != rows()) throw ParseError("time column does not match row count");
    const auto kind = times_->front().kind;
    std::map<std::string, std::size_t> last_row;
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto& t = (*times_)[r];
      if (t.kind != kind) throw ParseError("row " + std::to_string(r + 1) + ": mixed time formats");
      const auto it = last_row.find(row_subjects_[r]);
      if (it == last_row.end()) {
        subject_ids_.push_back(row_subjects_[r]);
      } else {
        if (it->second + 1 != r)
          throw ParseError("row " + std::to_string(r + 1) + ": rows of subject '" + row_subjects_[r] +
                           "' are not grouped together");
        const auto& prev = (*times_)[it->second];
        if (prev.value == t.value)
          throw ParseError("row " + std::to_string(r + 1) + ": duplicate observation (" + row_subjects_[r] + ", " +
                           t.text + ")");
        if (prev.value > t.value)
          throw ParseError("row " + std::to_string(r + 1) + ": times of subject '" + row_subjects_[r] +
                           "' are not increasing");
      }
      last_row[row_subjects_[r]] = r;
    }
  }

  std::vector<std::string> row_subjects_;
  std::vector<std::string> subject_ids_;
  std::vector<std::string> species_ids_;
  std::optional<std::vector<TimeLabel>> times_;
  std::vector<double> counts_;
};

/// Species x location counts with the distance of every location from a
/// reference origin (ranks 1..k unless given explicitly).
class LocationTable {
 public:
  static LocationTable create(std::vector<std::string> species_ids, std::vector<std::string> location_labels,
                              std::vector<double> distances, std::vector<double> counts) {
    LocationTable t;
    t.species_ids_ = std::move(species_ids);
    t.location_labels_ = std::move(location_labels);
    t.distances_ = std::move(distances);
    t.counts_ = std::move(counts);
    t.validate();
    return t;
  }

  std::size_t species_count() const noexcept { return species_ids_.size(); }
  std::size_t location_count() const noexcept { return location_labels_.size(); }
  const std::vector<std::string>& species_ids() const noexcept { return species_ids_; }
  const std::vector<std::string>& location_labels() const noexcept { return location_labels_; }
  const std::vector<double>& distances() const noexcept { return distances_; }
  const std::vector<double>& counts() const noexcept { return counts_; }
  double at(std::size_t species, std::size_t location) const {
    return counts_.at(species * location_count() + location);
  }
  std::span<const double> row(std::size_t species) const {
    return std::span<const double>(counts_).subspan(species * location_count(), location_count());
  }

  friend bool operator==(const LocationTable&, const LocationTable&) = default;

 private:
  LocationTable() = default;

  void validate() const {
    if (species_ids_.empty()) throw ParseError("no observations");
    if (location_labels_.empty()) throw ParseError("no location columns");
    std::set<std::string> seen;
    for (const auto& l : location_labels_)
      if (!seen.insert(l).second) throw ParseError("duplicate location column '" + l + "'");
    seen.clear();
    for (const auto& s : species_ids_) {
      if (s.empty()) throw ParseError("empty species identifier");
      if (!seen.insert(s).second) throw ParseError("duplicate species '" + s + "'");
    }
    if (distances_.size() != location_count()) throw ParseError("distance row does not match location count");
    for (std::size_t i = 0; i < distances_.size(); ++i) {
      if (!std::isfinite(distances_[i]) || distances_[i] <= 0.0)
        throw ParseError("distances must be positive (location '" + location_labels_[i] + "')");
      if (i > 0 && distances_[i] <= distances_[i - 1])
        throw ParseError("distances must increase (location '" + location_labels_[i] + "')");
    }
    if (counts_.size() != species_count() * location_count())
      throw ParseError("count matrix does not match table dimensions");
    for (std::size_t s = 0; s < species_count(); ++s)
      for (std::size_t l = 0; l < location_count(); ++l) {
        const double v = counts_[s * location_count() + l];
        if (!std::isfinite(v) || v < 0.0)
          throw ParseError("species '" + species_ids_[s] + "', location '" + location_labels_[l] +
                           "': count must be finite and non-negative");
      }
  }

  std::vector<std::string> species_ids_;
  std::vector<std::string> location_labels_;
  std::vector<double> distances_;
  std::vector<double> counts_;
};

namespace detail {

inline std::string where(const csv::Record& rec, const std::string& column) {
  return "line " + std::to_string(rec.line_no) + ", column '" + column + "'";
}

inline double parse_count(const csv::Record& rec, std::size_t field, const std::string& column) {
  const auto& cell = rec.fields[field];
  if (cell == "NA" || cell == "na" || cell == "NaN" || cell.empty())
    throw ParseError(where(rec, column) + ": missing value '" + cell + "' is not allowed");
  const auto v = csv::parse_double(cell);
  if (!v) throw ParseError(where(rec, column) + ": '" + cell + "' is not a number");
  if (*v < 0.0) throw ParseError(where(rec, column) + ": negative count " + cell);
  return *v == 0.0 ? 0.0 : *v;
}

inline void expect_width(const csv::Record& rec, std::size_t width) {
  if (rec.fields.size() != width)
    throw ParseError("line " + std::to_string(rec.line_no) + ": expected " + std::to_string(width) +
                     " fields, found " + std::to_string(rec.fields.size()));
}

inline std::vector<std::string> species_header(const csv::Record& header, std::size_t skip) {
  std::vector<std::string> species(header.fields.begin() + static_cast<std::ptrdiff_t>(skip), header.fields.end());
  if (species.empty()) throw ParseError("line " + std::to_string(header.line_no) + ": header lists no species");
  std::set<std::string> seen;
  for (const auto& s : species) {
    if (s.empty()) throw ParseError("line " + std::to_string(header.line_no) + ": empty column name");
    if (!seen.insert(s).second)
      throw ParseError("line " + std::to_string(header.line_no) + ": duplicate column '" + s + "'");
  }
  return species;
}

}  // namespace detail

/// CSV with header `subject_id,<species...>`, one row per subject.
inline AbundanceTable parse_cross_sectional(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw ParseError("empty input: missing header");
  const auto& header = records.front();
  if (header.fields.front() != "subject_id")
    throw ParseError("line " + std::to_string(header.line_no) + ": header must start with 'subject_id'");
  auto species = detail::species_header(header, 1);
  const std::size_t width = species.size() + 1;

  std::vector<std::string> subjects;
  std::vector<double> counts;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    detail::expect_width(rec, width);
    const auto& subject = rec.fields[0];
    if (subject.empty()) throw ParseError(detail::where(rec, "subject_id") + ": empty subject_id");
    if (!seen.insert(subject).second)
      throw ParseError("line " + std::to_string(rec.line_no) + ": duplicate subject_id '" + subject + "'");
    subjects.push_back(subject);
    for (std::size_t c = 0; c < species.size(); ++c) counts.push_back(detail::parse_count(rec, c + 1, species[c]));
  }
  if (subjects.empty()) throw ParseError("no observations");
  return AbundanceTable::create(std::move(subjects), std::move(species), std::nullopt, std::move(counts));
}

inline AbundanceTable parse_cross_sectional(const std::string& text) {
  std::istringstream in(text);
  return parse_cross_sectional(in);
}

/// CSV with header `subject_id,time,<species...>`. Rows are regrouped by
/// subject (first-appearance order); times must increase within a subject.
inline AbundanceTable parse_longitudinal(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw ParseError("empty input: missing header");
  const auto& header = records.front();
  if (header.fields.size() < 2 || header.fields[0] != "subject_id" || header.fields[1] != "time")
    throw ParseError("line " + std::to_string(header.line_no) + ": header must start with 'subject_id,time'");
  auto species = detail::species_header(header, 2);
  const std::size_t width = species.size() + 2;

  struct Obs {
    TimeLabel time;
    std::vector<double> counts;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Obs>> by_subject;
  std::optional<TimeLabel::Kind> kind;

  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    detail::expect_width(rec, width);
    const auto& subject = rec.fields[0];
    if (subject.empty()) throw ParseError(detail::where(rec, "subject_id") + ": empty subject_id");
    const auto time = parse_time_label(rec.fields[1]);
    if (!time)
      throw ParseError(detail::where(rec, "time") + ": '" + rec.fields[1] +
                       "' is neither an ISO-8601 date nor a non-negative integer index");
    if (kind && *kind != time->kind) throw ParseError(detail::where(rec, "time") + ": mixed time formats");
    kind = time->kind;

    auto [it, inserted] = by_subject.try_emplace(subject);
    if (inserted) order.push_back(subject);
    auto& series = it->second;
    for (const auto& prev : series) {
      if (prev.time.value == time->value)
        throw ParseError("line " + std::to_string(rec.line_no) + ": duplicate observation (" + subject + ", " +
                         time->text + ")");
    }
    if (!series.empty() && series.back().time.value > time->value)
      throw ParseError("line " + std::to_string(rec.line_no) + ": times of subject '" + subject +
                       "' are not increasing");
    Obs obs{*time, {}};
    for (std::size_t c = 0; c < species.size(); ++c) obs.counts.push_back(detail::parse_count(rec, c + 2, species[c]));
    series.push_back(std::move(obs));
  }
  if (order.empty()) throw ParseError("no observations");

  std::vector<std::string> subjects;
  std::vector<TimeLabel> times;
  std::vector<double> counts;
  for (const auto& s : order) {
    for (auto& obs : by_subject[s]) {
      subjects.push_back(s);
      times.push_back(obs.time);
      counts.insert(counts.end(), obs.counts.begin(), obs.counts.end());
    }
  }
  return AbundanceTable::create(std::move(subjects), std::move(species), std::move(times), std::move(counts));
}

inline AbundanceTable parse_longitudinal(const std::string& text) {
  std::istringstream in(text);
  return parse_longitudinal(in);
}

/// CSV with header `species,<loc...>` and an optional `distance,<d...>` row.
inline LocationTable parse_location(std::istream& in) {
  const auto records = csv::read_records(in);
  if (records.empty()) throw ParseError("empty input: missing header");
  const auto& header = records.front();
  if (header.fields.front() != "species")
    throw ParseError("line " + std::to_string(header.line_no) + ": header must start with 'species'");
  auto locations = detail::species_header(header, 1);
  const std::size_t width = locations.size() + 1;

  std::size_t first_data = 1;
  std::vector<double> distances;
  if (records.size() > 1 && records[1].fields.front() == "distance") {
    const auto& rec = records[1];
    detail::expect_width(rec, width);
    for (std::size_t l = 0; l < locations.size(); ++l) {
      const auto d = csv::parse_double(rec.fields[l + 1]);
      if (!d) throw ParseError(detail::where(rec, locations[l]) + ": distance '" + rec.fields[l + 1] + "' is not a number");
      if (*d <= 0.0) throw ParseError(detail::where(rec, locations[l]) + ": distances must be positive");
      if (!distances.empty() && *d <= distances.back())
        throw ParseError(detail::where(rec, locations[l]) + ": distances must increase");
      distances.push_back(*d);
    }
    first_data = 2;
  } else {
    for (std::size_t l = 0; l < locations.size(); ++l) distances.push_back(static_cast<double>(l + 1));
  }

  std::vector<std::string> species;
  std::vector<double> counts;
  std::set<std::string> seen;
  for (std::size_t i = first_data; i < records.size(); ++i) {
    const auto& rec = records[i];
    detail::expect_width(rec, width);
    const auto& name = rec.fields[0];
    if (name.empty()) throw ParseError(detail::where(rec, "species") + ": empty species identifier");
    if (!seen.insert(name).second)
      throw ParseError("line " + std::to_string(rec.line_no) + ": duplicate species '" + name + "'");
    species.push_back(name);
    for (std::size_t l = 0; l < locations.size(); ++l) counts.push_back(detail::parse_count(rec, l + 1, locations[l]));
  }
  if (species.empty()) throw ParseError("no observations");
  return LocationTable::create(std::move(species), std::move(locations), std::move(distances), std::move(counts));
}

inline LocationTable parse_location(const std::string& text) {
  std::istringstream in(text);
  return parse_location(in);
}

/// Serializes with shortest round-trip number formatting; re-parsing the
/// output reproduces the table exactly.
inline std::string to_csv(const AbundanceTable& t) {
  std::ostringstream out;
  out << "subject_id";
  if (t.has_times()) out << ",time";
  for (const auto& s : t.species_ids()) out << ',' << csv::quote_if_needed(s);
  out << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    out << csv::quote_if_needed(t.row_subject(r));
    if (t.has_times()) out << ',' << (*t.times())[r].text;
    for (double v : t.row(r)) out << ',' << csv::format_exact(v);
    out << '\n';
  }
  return out.str();
}

inline std::string to_csv(const LocationTable& t) {
  std::ostringstream out;
  out << "species";
  for (const auto& l : t.location_labels()) out << ',' << csv::quote_if_needed(l);
  out << "\ndistance";
  for (double d : t.distances()) out << ',' << csv::format_exact(d);
  out << '\n';
  for (std::size_t s = 0; s < t.species_count(); ++s) {
    out << csv::quote_if_needed(t.species_ids()[s]);
    for (double v : t.row(s)) out << ',' << csv::format_exact(v);
    out << '\n';
  }
  return out.str();
}

/// Relative abundance: every observation row divided by its row total.
inline AbundanceTable normalize_rows(const AbundanceTable& t) {
  std::vector<double> counts;
  counts.reserve(t.counts().size());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto row = t.row(r);
    double total = 0.0;
    for (double v : row) total += v;
    if (total <= 0.0) throw DataError("row '" + t.row_label(r) + "': zero total, cannot normalize");
    for (double v : row) counts.push_back(v / total);
  }
  return AbundanceTable::create(t.row_subjects(), t.species_ids(), t.times(), std::move(counts));
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_ABUNDANCE_IO_HPP
