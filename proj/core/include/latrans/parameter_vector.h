#ifndef LATRANS_PARAMETER_VECTOR_H_
#define LATRANS_PARAMETER_VECTOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace latrans {

struct ParamSlice {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const ParamSlice&) const = default;
};

// Flat weight vector with named, contiguous slices that partition [0, size).
// Gradients share the layout of the parameters they differentiate.
class ParameterVector {
 public:
  ParameterVector() = default;
  // Throws InvalidInputError if the slices do not tile the values exactly or a
  // value is not finite.
  ParameterVector(std::vector<ParamSlice> layout, std::vector<double> values);

  // Zero-filled vector for a layout given as (name, size) pairs in order.
  static ParameterVector Zeros(
      const std::vector<std::pair<std::string, std::size_t>>& slices);

  std::size_t size() const { return values_.size(); }
  const std::vector<ParamSlice>& layout() const { return layout_; }
  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  const ParamSlice& slice_info(const std::string& name) const;
  std::span<const double> slice(const std::string& name) const;
  std::span<double> mutable_slice(const std::string& name);

  bool SameLayout(const ParameterVector& other) const {
    return layout_ == other.layout_;
  }
  ParameterVector ZerosLike() const;

  double Dot(const ParameterVector& other) const;
  double SquaredNorm() const { return Dot(*this); }
  double Norm() const;
  // this += scale * other
  void Axpy(double scale, const ParameterVector& other);
  void Scale(double factor);
  // Rescales in place so that Norm() <= max_norm; returns the original norm.
  double ClipNorm(double max_norm);
  bool AllFinite() const;

  bool operator==(const ParameterVector& other) const = default;

 private:
  void CheckCompatible(const ParameterVector& other) const;

  std::vector<ParamSlice> layout_;
  std::vector<double> values_;
};

}  // namespace latrans

#endif  // LATRANS_PARAMETER_VECTOR_H_
