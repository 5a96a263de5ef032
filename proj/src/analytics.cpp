#include "rigel/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace rigel {

MetricsReport error_metrics(std::span<const EstimatePair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("error_metrics: no pairs");
  MetricsReport r;
  double rel = 0, abs_sum = 0, sym = 0;
  double exp_sum = 0, con_sum = 0;
  std::size_t exp_n = 0, con_n = 0;
  double worst_exp = 1, worst_con = 1;  // SD >= 1 even when no pair contracts
  for (const auto& p : pairs) {
    if (!(p.estimate > 0.0) || !std::isfinite(p.estimate))
      throw std::invalid_argument("error_metrics: estimates must be finite and > 0");
    if (!(p.truth >= 1.0)) throw std::invalid_argument("error_metrics: true distances must be >= 1");
    const double err = std::abs(p.estimate - p.truth);
    const double expansion = p.estimate / p.truth;
    const double contraction = p.truth / p.estimate;
    abs_sum += err;
    rel += err / p.truth;
    sym += std::max(expansion, contraction);
    if (p.estimate >= p.truth) {
      exp_sum += expansion;
      ++exp_n;
    } else {
      con_sum += contraction;
      ++con_n;
    }
    worst_exp = std::max(worst_exp, expansion);
    worst_con = std::max(worst_con, contraction);
  }
  const double n = static_cast<double>(pairs.size());
  r.pair_count = pairs.size();
  r.are = rel / n;
  r.aae = abs_sum / n;
  r.aer = exp_n ? exp_sum / double(exp_n) : 1.0;
  r.acr = con_n ? con_sum / double(con_n) : 1.0;
  r.aspd = sym / n;
  r.sd = worst_exp * worst_con;
  return r;
}

SeparationReport separation_metrics(const DistanceFn& distance_fn,
                                    const std::vector<NodeId>& sample) {
  if (sample.size() < 2) throw std::invalid_argument("separation_metrics: need at least 2 nodes");
  const std::size_t n = sample.size();
  std::vector<double> ecc(n, -1.0);
  double sum = 0;
  std::size_t counted = 0;
  SeparationReport r;
  r.sample_size = n;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto d = distance_fn(sample[i], sample[j]);
      if (!d) {
        ++r.skipped_pairs;
        continue;
      }
      ecc[i] = std::max(ecc[i], *d);
      ecc[j] = std::max(ecc[j], *d);
      sum += *d;
      ++counted;
    }
  double radius = std::numeric_limits<double>::infinity();
  double diameter = 0;
  for (double e : ecc) {
    if (e < 0) continue;
    radius = std::min(radius, e);
    diameter = std::max(diameter, e);
  }
  r.radius = std::isfinite(radius) ? radius : 0.0;
  r.diameter = diameter;
  r.avg_path_length = counted ? sum / double(counted) : 0.0;
  return r;
}

std::vector<NodeId> centrality_topk(const DistanceFn& distance_fn,
                                    const std::vector<NodeId>& candidates,
                                    const std::vector<NodeId>& reference_set, std::size_t k) {
  if (reference_set.empty()) throw std::invalid_argument("centrality_topk: empty reference set");
  if (k > candidates.size()) throw std::invalid_argument("centrality_topk: k exceeds candidates");
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(candidates.size());
  for (NodeId c : candidates) {
    double sum = 0;
    std::size_t count = 0;
    for (NodeId r : reference_set) {
      if (r == c) continue;
      if (auto d = distance_fn(c, r)) {
        sum += *d;
        ++count;
      }
    }
    scored.emplace_back(count ? sum / double(count) : std::numeric_limits<double>::infinity(), c);
  }
  std::sort(scored.begin(), scored.end());
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<NodeId> social_search(const DistanceFn& distance_fn, NodeId query,
                                  const std::vector<NodeId>& responders, std::size_t k) {
  if (k > responders.size()) throw std::invalid_argument("social_search: k exceeds responders");
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(responders.size());
  for (NodeId r : responders)
    scored.emplace_back(distance_fn(query, r).value_or(std::numeric_limits<double>::infinity()), r);
  std::sort(scored.begin(), scored.end());
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

double topk_overlap(const std::vector<NodeId>& a, const std::vector<NodeId>& b, std::size_t k) {
  if (k == 0) throw std::invalid_argument("topk_overlap: k must be > 0");
  if (a.size() < k || b.size() < k) throw std::invalid_argument("topk_overlap: list shorter than k");
  std::unordered_set<NodeId> left(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k));
  std::unordered_set<NodeId> right(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t m = 0;
  for (NodeId x : left) m += right.contains(x);
  return double(m) / double(k);
}

std::string format_double(double value) {
  std::ostringstream os;
  os.precision(6);
  os << value;
  return os.str();
}

void write_key_values(std::ostream& out, const MetricsReport& r, const std::string& prefix) {
  out << prefix << "pairs=" << r.pair_count << '\n'
      << prefix << "are=" << format_double(r.are) << '\n'
      << prefix << "aae=" << format_double(r.aae) << '\n'
      << prefix << "aer=" << format_double(r.aer) << '\n'
      << prefix << "acr=" << format_double(r.acr) << '\n'
      << prefix << "aspd=" << format_double(r.aspd) << '\n'
      << prefix << "sd=" << format_double(r.sd) << '\n';
}

void write_key_values(std::ostream& out, const SeparationReport& r, const std::string& prefix) {
  out << prefix << "sample_size=" << r.sample_size << '\n'
      << prefix << "radius=" << format_double(r.radius) << '\n'
      << prefix << "diameter=" << format_double(r.diameter) << '\n'
      << prefix << "avg_path_length=" << format_double(r.avg_path_length) << '\n'
      << prefix << "skipped_pairs=" << r.skipped_pairs << '\n';
}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("csv row width mismatch");
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

}  // namespace rigel
