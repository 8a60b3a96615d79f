#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vsir/corpus.hpp"
#include "vsir/params.hpp"

namespace vsir {

struct WelchResult {
  double t = 0.0;
  double p = 1.0;    // two-sided
  double dof = 0.0;  // Welch-Satterthwaite
};

/// Welch's unequal-variance t-test of mean(a) - mean(b). Each sample needs at
/// least 2 values and at least one sample must have non-zero variance.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

enum class FrequencyBand { low, mid, high };

std::string to_string(FrequencyBand band);

struct TermNorm {
  std::string term;
  std::uint64_t cf = 0;
  double l2norm = 0.0;
  FrequencyBand band = FrequencyBand::mid;
};

struct TermNormReport {
  std::vector<TermNorm> terms;  // by descending collection frequency
  double mean_low = 0.0;
  double mean_mid = 0.0;
  double mean_high = 0.0;
  WelchResult mid_vs_low;
  WelchResult mid_vs_high;
};

/// Splits the non-reserved vocabulary by collection-frequency rank into the
/// top quarter (high), bottom quarter (low) and the rest (mid), and relates
/// each band to the L2 norms of the word embeddings. Needs >= 8 terms.
/// Two constant bands compare as t = 0, p = 1 when equal and t = +-inf, p = 0
/// otherwise.
TermNormReport term_norm_report(const ModelParams& params, const Vocabulary& vocab);

/// `term,cf,l2norm,band` rows followed by a `#`-prefixed summary block.
void write_report_csv(std::ostream& out, const TermNormReport& report);

}  // namespace vsir
