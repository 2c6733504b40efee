#include "latrans/parameter_vector.h"

#include <cmath>

#include "latrans/errors.h"

namespace latrans {

ParameterVector::ParameterVector(std::vector<ParamSlice> layout,
                                 std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  std::size_t expected = 0;
  for (const auto& s : layout_) {
    if (s.offset != expected) {
      throw InvalidInputError("parameter slice '" + s.name +
                              "' does not start where the previous one ends");
    }
    expected += s.size;
  }
  if (expected != values_.size()) {
    throw InvalidInputError("parameter layout covers " + std::to_string(expected) +
                            " values but " + std::to_string(values_.size()) +
                            " were given");
  }
  if (!AllFinite()) throw InvalidInputError("parameter vector has non-finite values");
}

ParameterVector ParameterVector::Zeros(
    const std::vector<std::pair<std::string, std::size_t>>& slices) {
  std::vector<ParamSlice> layout;
  std::size_t offset = 0;
  for (const auto& [name, size] : slices) {
    layout.push_back({name, offset, size});
    offset += size;
  }
  return ParameterVector(std::move(layout), std::vector<double>(offset, 0.0));
}

const ParamSlice& ParameterVector::slice_info(const std::string& name) const {
  for (const auto& s : layout_) {
    if (s.name == name) return s;
  }
  throw InvalidInputError("no parameter slice named '" + name + "'");
}

std::span<const double> ParameterVector::slice(const std::string& name) const {
  const auto& s = slice_info(name);
  return std::span<const double>(values_).subspan(s.offset, s.size);
}

std::span<double> ParameterVector::mutable_slice(const std::string& name) {
  const auto& s = slice_info(name);
  return std::span<double>(values_).subspan(s.offset, s.size);
}

ParameterVector ParameterVector::ZerosLike() const {
  ParameterVector out;
  out.layout_ = layout_;
  out.values_.assign(values_.size(), 0.0);
  return out;
}

void ParameterVector::CheckCompatible(const ParameterVector& other) const {
  if (!SameLayout(other)) throw InvalidInputError("parameter layouts differ");
}

double ParameterVector::Dot(const ParameterVector& other) const {
  CheckCompatible(other);
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) acc += values_[i] * other.values_[i];
  return acc;
}

double ParameterVector::Norm() const { return std::sqrt(SquaredNorm()); }

void ParameterVector::Axpy(double scale, const ParameterVector& other) {
  CheckCompatible(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += scale * other.values_[i];
}

void ParameterVector::Scale(double factor) {
  for (double& v : values_) v *= factor;
}

double ParameterVector::ClipNorm(double max_norm) {
  const double norm = Norm();
  if (norm > max_norm && norm > 0.0) Scale(max_norm / norm);
  return norm;
}

bool ParameterVector::AllFinite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace latrans
