#ifndef TAYLORLAW_MV_EXTRACTION_HPP
#define TAYLORLAW_MV_EXTRACTION_HPP

// Mean-variance pair extraction under the five application schemes.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taylorlaw/abundance_io.hpp"
#include "taylorlaw/error.hpp"

namespace taylorlaw {

enum class SchemeTag {
  subjects_across_species,   // one pair per observation row
  species_across_subjects,   // one pair per species column
  mean_converted_subjects,   // time-averaged rows, then one pair per subject
  per_subject_time,          // one subject: one pair per time point
  per_subject_species        // one subject: one pair per species over time
};

inline constexpr std::string_view to_string(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::subjects_across_species: return "subjects_across_species";
    case SchemeTag::species_across_subjects: return "species_across_subjects";
    case SchemeTag::mean_converted_subjects: return "mean_converted_subjects";
    case SchemeTag::per_subject_time: return "per_subject_time";
    case SchemeTag::per_subject_species: return "per_subject_species";
  }
  return "unknown";
}

inline std::optional<SchemeTag> scheme_tag_from_string(std::string_view s) {
  for (auto tag : {SchemeTag::subjects_across_species, SchemeTag::species_across_subjects,
                   SchemeTag::mean_converted_subjects, SchemeTag::per_subject_time, SchemeTag::per_subject_species})
    if (to_string(tag) == s) return tag;
  return std::nullopt;
}

inline constexpr bool requires_subject(SchemeTag tag) {
  return tag == SchemeTag::per_subject_time || tag == SchemeTag::per_subject_species;
}

/// Extraction scheme; the per-subject tags carry the subject they apply to.
class Scheme {
 public:
  explicit Scheme(SchemeTag tag, std::optional<std::string> subject = std::nullopt)
      : tag_(tag), subject_(std::move(subject)) {
    if (requires_subject(tag_) != subject_.has_value()) {
      throw UsageError(requires_subject(tag_)
                           ? "scheme " + std::string(to_string(tag_)) + " requires a subject"
                           : "scheme " + std::string(to_string(tag_)) + " does not take a subject");
    }
  }

  SchemeTag tag() const noexcept { return tag_; }
  const std::optional<std::string>& subject() const noexcept { return subject_; }

  friend bool operator==(const Scheme&, const Scheme&) = default;

 private:
  SchemeTag tag_;
  std::optional<std::string> subject_;
};

struct MVPair {
  std::string label;
  double mean = 0.0;
  double variance = 0.0;

  friend bool operator==(const MVPair&, const MVPair&) = default;
};

struct MVSeries {
  Scheme scheme;
  std::vector<MVPair> pairs;
  std::size_t n_dropped = 0;
};

/// Arithmetic mean and unbiased (n-1) variance. Values are summed in
/// ascending order so the result does not depend on their input order; a
/// constant sample yields exactly zero variance.
inline std::pair<double, double> mean_variance(std::vector<double> values) {
  if (values.empty()) throw DataError("mean/variance of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  if (values.front() == values.back()) return {values.front(), 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / n;
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - mean) * (v - mean));
  std::sort(sq.begin(), sq.end());
  double ss = 0.0;
  for (double d : sq) ss += d;
  return {mean, ss / (n - 1.0)};
}

/// Collapses each subject's time series to per-species arithmetic means.
inline AbundanceTable mean_convert(const AbundanceTable& table) {
  if (!table.has_times()) throw UsageError("mean conversion requires a table with a time column");
  std::vector<double> counts;
  counts.reserve(table.subject_ids().size() * table.cols());
  for (const auto& subject : table.subject_ids()) {
    const auto rows = table.rows_of(subject);
    for (std::size_t c = 0; c < table.cols(); ++c) {
      std::vector<double> column;
      column.reserve(rows.size());
      for (auto r : rows) column.push_back(table.at(r, c));
      counts.push_back(mean_variance(std::move(column)).first);
    }
  }
  return AbundanceTable::create(table.subject_ids(), table.species_ids(), std::nullopt, std::move(counts));
}

namespace detail {

inline MVPair row_pair(const AbundanceTable& t, std::size_t r, std::string label) {
  const auto row = t.row(r);
  const auto [m, v] = mean_variance(std::vector<double>(row.begin(), row.end()));
  return {std::move(label), m, v};
}

inline MVPair column_pair(const AbundanceTable& t, std::span<const std::size_t> rows, std::size_t c) {
  std::vector<double> column;
  column.reserve(rows.size());
  for (auto r : rows) column.push_back(t.at(r, c));
  const auto [m, v] = mean_variance(std::move(column));
  return {t.species_ids()[c], m, v};
}

inline std::vector<std::size_t> subject_rows(const AbundanceTable& t, const Scheme& scheme) {
  if (!t.has_times())
    throw UsageError("scheme " + std::string(to_string(scheme.tag())) + " requires a table with a time column");
  const auto& subject = *scheme.subject();
  if (!t.has_subject(subject)) throw UsageError("unknown subject '" + subject + "'");
  return t.rows_of(subject);
}

}  // namespace detail

/// Extracts one (label, M, V) pair per row or column as the scheme dictates.
inline MVSeries extract_pairs(const AbundanceTable& table, const Scheme& scheme) {
  MVSeries series{scheme, {}, 0};
  switch (scheme.tag()) {
    case SchemeTag::subjects_across_species:
      for (std::size_t r = 0; r < table.rows(); ++r) series.pairs.push_back(detail::row_pair(table, r, table.row_label(r)));
      break;
    case SchemeTag::species_across_subjects: {
      std::vector<std::size_t> rows(table.rows());
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
      for (std::size_t c = 0; c < table.cols(); ++c) series.pairs.push_back(detail::column_pair(table, rows, c));
      break;
    }
    case SchemeTag::mean_converted_subjects: {
      const auto converted = mean_convert(table);
      series.pairs = extract_pairs(converted, Scheme(SchemeTag::subjects_across_species)).pairs;
      break;
    }
    case SchemeTag::per_subject_time:
      for (auto r : detail::subject_rows(table, scheme))
        series.pairs.push_back(detail::row_pair(table, r, (*table.times())[r].text));
      break;
    case SchemeTag::per_subject_species: {
      const auto rows = detail::subject_rows(table, scheme);
      for (std::size_t c = 0; c < table.cols(); ++c) series.pairs.push_back(detail::column_pair(table, rows, c));
      break;
    }
  }
  return series;
}

}  // namespace taylorlaw

#endif  // TAYLORLAW_MV_EXTRACTION_HPP
