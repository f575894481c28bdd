#pragma once

namespace qg {

// Scalar space-time field with the derivatives the solver consumes:
// first order for clamped-data checks and nodal interpolation, second
// order for error norms. Time-independent fields ignore t.
class AnalyticField {
 public:
  virtual ~AnalyticField() = default;
  virtual double value(double x, double y, double t) const = 0;
  virtual double ddx(double x, double y, double t) const = 0;
  virtual double ddy(double x, double y, double t) const = 0;
  virtual double dxy(double x, double y, double t) const = 0;
  virtual double laplacian(double x, double y, double t) const = 0;
};

class ZeroField final : public AnalyticField {
 public:
  double value(double, double, double) const override { return 0.0; }
  double ddx(double, double, double) const override { return 0.0; }
  double ddy(double, double, double) const override { return 0.0; }
  double dxy(double, double, double) const override { return 0.0; }
  double laplacian(double, double, double) const override { return 0.0; }
};

}  // namespace qg
