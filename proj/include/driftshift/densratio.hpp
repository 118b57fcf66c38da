#ifndef DRIFTSHIFT_DENSRATIO_HPP
#define DRIFTSHIFT_DENSRATIO_HPP

#include <memory>
#include <vector>

#include "driftshift/confbands.hpp"
#include "driftshift/core.hpp"

namespace driftshift {

struct RadiusLevel {
  double radius;
  BallCounts counts;  // cumulative: points with distance <= radius
};

/// Distances from a query to every first-half labelled point.
struct RadiusProfile {
  std::vector<double> radii;        // ascending, duplicates kept
  std::vector<RadiusLevel> levels;  // one entry per distinct radius
};

/// Throws std::domain_error if x is foreign to the space.
RadiusProfile radius_profile(const Point& x, const LabeledPool& pool, const MetricSpace& space);

struct LepskiRadius {
  double radius;
  std::size_t level;         // index into RadiusProfile::levels
  int intervals_inspected;   // including the one that emptied the fold
};

/// Largest radius whose running intersection of eta intervals over all
/// smaller-or-equal radii is nonempty. The smallest radius always qualifies.
LepskiRadius lepski_radius(const RadiusProfile& profile, double delta);

struct EtaEstimate {
  double value;
  double chosen_radius;
  int intervals_inspected;
};

EtaEstimate eta_hat(const Point& x, const LabeledPool& pool, const MetricSpace& space, double delta);

/// 1{2 eta >= 1}; a tie goes to 1.
inline int indicator_from_eta(double eta) { return 2.0 * eta >= 1.0 ? 1 : 0; }

int f_hat(const Point& x, const LabeledPool& pool, const MetricSpace& space, double delta);

/// eta_hat bound to one pool. On the real line the first-half points are
/// presorted once and each query merges outward from its insertion point,
/// which avoids the per-query sort. Results equal the generic path exactly.
class DensityRatioEstimator {
 public:
  DensityRatioEstimator(std::shared_ptr<const LabeledPool> pool, MetricSpace space, double delta);

  RadiusProfile profile(const Point& x) const;
  EtaEstimate estimate(const Point& x) const;
  int indicator(const Point& x) const { return indicator_from_eta(estimate(x).value); }

  const LabeledPool& pool() const { return *pool_; }
  const MetricSpace& space() const { return space_; }
  double delta() const { return delta_; }

 private:
  RadiusProfile profile_1d(double x) const;

  std::shared_ptr<const LabeledPool> pool_;
  MetricSpace space_;
  double delta_;
  std::vector<double> sorted_coords_;
  std::vector<unsigned char> sorted_labels_;
};

}  // namespace driftshift

#endif  // DRIFTSHIFT_DENSRATIO_HPP
