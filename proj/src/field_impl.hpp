#pragma once

// Concrete field kinds. Internal: only the factories and the JSON codec see them.

#include <vector>

#include "weaklp/fields.hpp"

namespace weaklp::detail {

class BumpField final : public FieldImpl {
 public:
  BumpField(int dim, const Point& center, double radius, double amplitude);
  int dim() const override { return dim_; }
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;
  Box support_box() const override;
  FieldBounds bounds() const override;
  std::vector<std::vector<double>> breakpoints() const override;
  std::string describe() const override;

  int dim_;
  Point center_;
  double radius_;
  double amplitude_;
};

class ProductBumpField final : public FieldImpl {
 public:
  ProductBumpField(int dim, const Point& center, const Point& radii, double amplitude);
  int dim() const override { return dim_; }
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;
  Box support_box() const override;
  FieldBounds bounds() const override;
  std::vector<std::vector<double>> breakpoints() const override;
  std::string describe() const override;

  int dim_;
  Point center_;
  Point radii_;
  double amplitude_;
};

class MollifiedIndicatorField final : public FieldImpl {
 public:
  MollifiedIndicatorField(const Box& box, double epsilon);
  int dim() const override { return box_.dim; }
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;
  Box support_box() const override;
  FieldBounds bounds() const override;
  std::vector<std::vector<double>> breakpoints() const override;
  std::string describe() const override;

  double profile(int axis, double t) const;
  double profile_d1(int axis, double t) const;

  Box box_;
  double epsilon_;
};

class SumField final : public FieldImpl {
 public:
  explicit SumField(std::vector<std::pair<double, ScalarField>> terms);
  int dim() const override { return dim_; }
  double value(const Point& x) const override;
  Point gradient(const Point& x) const override;
  Box support_box() const override;
  FieldBounds bounds() const override;
  std::vector<std::vector<double>> breakpoints() const override;
  std::string describe() const override;

  int dim_;
  std::vector<std::pair<double, ScalarField>> terms_;
};

class ZeroField final : public FieldImpl {
 public:
  explicit ZeroField(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double value(const Point&) const override { return 0.0; }
  Point gradient(const Point&) const override { return Point{}; }
  Box support_box() const override;
  FieldBounds bounds() const override { return FieldBounds{}; }
  std::vector<std::vector<double>> breakpoints() const override { return {}; }
  std::string describe() const override { return "zero"; }

  int dim_;
};

class ScaledField final : public FieldImpl {
 public:
  ScaledField(ScalarField inner, double factor) : inner_(std::move(inner)), factor_(factor) {}
  int dim() const override { return inner_.dimension(); }
  double value(const Point& x) const override { return factor_ * inner_(x); }
  Point gradient(const Point& x) const override;
  Box support_box() const override { return inner_.support_box(); }
  FieldBounds bounds() const override;
  std::vector<std::vector<double>> breakpoints() const override { return inner_.breakpoints(); }
  std::string describe() const override;

  ScalarField inner_;
  double factor_;
};

class TranslatedField final : public FieldImpl {
 public:
  TranslatedField(ScalarField inner, const Point& shift) : inner_(std::move(inner)), shift_(shift) {}
  int dim() const override { return inner_.dimension(); }
  double value(const Point& x) const override { return inner_(shifted(x)); }
  Point gradient(const Point& x) const override { return inner_.gradient(shifted(x)); }
  Box support_box() const override;
  FieldBounds bounds() const override { return inner_.bounds(); }
  std::vector<std::vector<double>> breakpoints() const override;
  std::string describe() const override;

  Point shifted(const Point& x) const {
    Point y = x;
    for (int i = 0; i < inner_.dimension(); ++i) y[i] -= shift_[i];
    return y;
  }

  ScalarField inner_;
  Point shift_;
};

}  // namespace weaklp::detail
