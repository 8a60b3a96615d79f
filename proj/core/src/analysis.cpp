#include "vsir/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "vsir/error.hpp"
#include "vsir/vector_ops.hpp"

namespace vsir {
namespace {

struct Moments {
  double mean;
  double var;  // unbiased
};

Moments moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / (n - 1.0)};
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Band comparison that tolerates two constant bands, which welch_t rejects.
WelchResult compare_bands(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ma = moments(a);
  const auto mb = moments(b);
  if (ma.var > 0.0 || mb.var > 0.0) return welch_t(a, b);
  WelchResult r;
  if (ma.mean != mb.mean) {
    r.t = ma.mean > mb.mean ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
  }
  return r;
}

}  // namespace

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs at least 2 values per sample");
  const auto ma = moments(a);
  const auto mb = moments(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = ma.var / na;
  const double vb = mb.var / nb;
  const double se2 = va + vb;
  if (!(se2 > 0.0)) throw std::invalid_argument("Welch test needs non-zero variance in at least one sample");

  WelchResult r;
  r.t = (ma.mean - mb.mean) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const boost::math::students_t dist(r.dof);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::string to_string(FrequencyBand band) {
  switch (band) {
    case FrequencyBand::low:
      return "low";
    case FrequencyBand::mid:
      return "mid";
    case FrequencyBand::high:
      return "high";
  }
  return "?";
}

TermNormReport term_norm_report(const ModelParams& params, const Vocabulary& vocab) {
  const auto& emb = params[tensor::kWordEmb];
  if (emb.rows() != vocab.size()) throw std::invalid_argument("vocabulary does not match the word embeddings");

  std::vector<TokenId> ids;
  for (TokenId id = 0; id < vocab.size(); ++id) {
    if (!vocab.is_reserved(id)) ids.push_back(id);
  }
  if (ids.size() < 8) throw std::invalid_argument("term norm report needs at least 8 non-reserved terms");
  std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) {
    if (vocab.count(a) != vocab.count(b)) return vocab.count(a) > vocab.count(b);
    return vocab.term(a) < vocab.term(b);
  });

  const std::size_t quarter = ids.size() / 4;
  TermNormReport report;
  std::vector<double> low;
  std::vector<double> mid;
  std::vector<double> high;
  for (std::size_t rank = 0; rank < ids.size(); ++rank) {
    const TokenId id = ids[rank];
    TermNorm row{vocab.term(id), vocab.count(id), l2_norm(emb.row(id)), FrequencyBand::mid};
    if (rank < quarter) {
      row.band = FrequencyBand::high;
      high.push_back(row.l2norm);
    } else if (rank >= ids.size() - quarter) {
      row.band = FrequencyBand::low;
      low.push_back(row.l2norm);
    } else {
      mid.push_back(row.l2norm);
    }
    report.terms.push_back(std::move(row));
  }
  report.mean_low = mean_of(low);
  report.mean_mid = mean_of(mid);
  report.mean_high = mean_of(high);
  report.mid_vs_low = compare_bands(mid, low);
  report.mid_vs_high = compare_bands(mid, high);
  return report;
}

void write_report_csv(std::ostream& out, const TermNormReport& report) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(9);
  out << "term,cf,l2norm,band\n";
  for (const auto& t : report.terms) {
    out << t.term << ',' << t.cf << ',' << t.l2norm << ',' << to_string(t.band) << '\n';
  }
  out << "# mean_l2norm,low," << report.mean_low << '\n';
  out << "# mean_l2norm,mid," << report.mean_mid << '\n';
  out << "# mean_l2norm,high," << report.mean_high << '\n';
  out << "# welch,mid_vs_low,t=" << report.mid_vs_low.t << ",dof=" << report.mid_vs_low.dof
      << ",p=" << report.mid_vs_low.p << '\n';
  out << "# welch,mid_vs_high,t=" << report.mid_vs_high.t << ",dof=" << report.mid_vs_high.dof
      << ",p=" << report.mid_vs_high.p << '\n';
  out.flags(flags);
  out.precision(precision);
}

}  // namespace vsir
