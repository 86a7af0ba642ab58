#pragma once

#include <stdexcept>
#include <string>

namespace medheur {

enum class ScenarioKind { MeanShift, VarianceScale };

// Two-distribution setup under the split-sample model. P is always the
// d-dimensional standard Gaussian; Q shifts every coordinate by mu
// (MeanShift) or scales the standard deviation by sigma (VarianceScale).
// alpha is the split proportion: the first floor(alpha*n) observations
// follow P, the rest follow Q.
struct Scenario {
  ScenarioKind kind = ScenarioKind::MeanShift;
  double mu = 0.0;     // MeanShift only
  double sigma = 1.0;  // VarianceScale only, >= 1
  double alpha = 0.5;  // in (0,1), strictly
  int dim = 1;

  static Scenario mean_shift(double mu, double alpha = 0.5, int dim = 1) {
    Scenario s;
    s.kind = ScenarioKind::MeanShift;
    s.mu = mu;
    s.alpha = alpha;
    s.dim = dim;
    s.validate();
    return s;
  }

  static Scenario variance_scale(double sigma, double alpha = 0.5,
                                 int dim = 1) {
    Scenario s;
    s.kind = ScenarioKind::VarianceScale;
    s.sigma = sigma;
    s.alpha = alpha;
    s.dim = dim;
    s.validate();
    return s;
  }

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("Scenario: alpha must lie strictly in (0,1)");
    }
    if (dim < 1) throw std::invalid_argument("Scenario: dim must be >= 1");
    if (kind == ScenarioKind::VarianceScale && !(sigma >= 1.0)) {
      throw std::invalid_argument("Scenario: sigma must be >= 1");
    }
  }

  // P == Q: no detectable change.
  bool is_null() const {
    return kind == ScenarioKind::MeanShift ? mu == 0.0 : sigma == 1.0;
  }

  std::string kind_name() const {
    return kind == ScenarioKind::MeanShift ? "mean_shift" : "variance_scale";
  }
};

}  // namespace medheur
