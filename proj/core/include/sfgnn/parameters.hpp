#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sfgnn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Ordered collection of named dense tensors. Vectors are stored as n x 1
/// matrices so optimizers, checkpoints and gradient checks treat every
/// parameter uniformly. Tensor order is the insertion order and is part of
/// the checkpoint format.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    bool regularized = true;  // included in the L2 penalty
  };

  std::size_t add(std::string name, Matrix value, bool regularized = true);

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t scalar_count() const noexcept;

  Matrix& operator[](std::size_t i) { return entries_[i].value; }
  const Matrix& operator[](std::size_t i) const { return entries_[i].value; }

  Matrix& at(std::string_view name);
  const Matrix& at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;

  const std::string& name(std::size_t i) const { return entries_[i].name; }
  bool regularized(std::size_t i) const { return entries_[i].regularized; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Same names and shapes, all zeros.
  ParameterSet zeros_like() const;

  bool same_layout(const ParameterSet& other) const noexcept;
  bool all_finite() const noexcept;

  void set_zero();
  /// this += scale * other; layouts must match.
  void axpy(double scale, const ParameterSet& other);

 private:
  std::vector<Entry> entries_;
};

}  // namespace sfgnn
