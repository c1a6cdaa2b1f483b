#pragma once

// Dense reference kernels with multiplication counters.
//
// The planner runs on sparse tables; these kernels materialize every table
// densely and loop over every entry so that the number of floating-point
// multiplications is a property of the dimensions alone:
//
//   flat      belief update  |S|^2 + 2|S|     obs prob  |S|^2     value  |G||S|
//   factored  belief update  2|Y|^2 + 2|Y|    obs prob  2|Y|^2    value  |G_Y(x)||Y|
//
// Counting convention: the T_X * T_Y product is charged once per (y, y')
// pair, and the observation-weighted reduction that turns the prediction into
// P(z|b,a) is not charged by obs prob (the belief update charges the same
// products as its first |Y| term). Normalization is a multiplication by 1/eta
// per entry.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fhhop/factored_model.hpp"
#include "fhhop/flat_model.hpp"

namespace fhhop {

struct MulCounter {
  std::uint64_t count = 0;
};

inline constexpr std::size_t kDenseEntryCap = std::size_t{1} << 26;

class DenseFlatTables {
 public:
  /// Throws ModelTooLarge when any table would exceed kDenseEntryCap entries.
  explicit DenseFlatTables(const FlatModel& model);

  std::uint32_t num_states() const noexcept { return s_; }
  std::uint32_t num_actions() const noexcept { return a_; }
  std::uint32_t num_observations() const noexcept { return z_; }
  double transition(std::uint32_t s, std::uint32_t a, std::uint32_t next) const noexcept {
    return t_[(static_cast<std::size_t>(s) * a_ + a) * s_ + next];
  }
  double observation(std::uint32_t a, std::uint32_t next, std::uint32_t z) const noexcept {
    return o_[(static_cast<std::size_t>(a) * s_ + next) * z_ + z];
  }

 private:
  std::uint32_t s_, a_, z_;
  std::vector<double> t_;
  std::vector<double> o_;
};

class DenseFactoredTables {
 public:
  explicit DenseFactoredTables(const FactoredModel& model);

  std::uint32_t num_x() const noexcept { return x_; }
  std::uint32_t num_y() const noexcept { return y_; }
  double transition_x(std::uint32_t x, std::uint32_t y, std::uint32_t a, std::uint32_t nx) const noexcept {
    return tx_[((static_cast<std::size_t>(x) * y_ + y) * a_ + a) * x_ + nx];
  }
  double transition_y(std::uint32_t x, std::uint32_t y, std::uint32_t a, std::uint32_t nx,
                      std::uint32_t ny) const noexcept {
    return ty_[(((static_cast<std::size_t>(x) * y_ + y) * a_ + a) * x_ + nx) * y_ + ny];
  }
  double observation(std::uint32_t a, std::uint32_t nx, std::uint32_t ny, std::uint32_t z) const noexcept {
    return o_[((static_cast<std::size_t>(a) * x_ + nx) * y_ + ny) * z_ + z];
  }

 private:
  std::uint32_t x_, y_, a_, z_;
  std::vector<double> tx_;
  std::vector<double> ty_;
  std::vector<double> o_;
};

namespace counted {

UpdateResult belief_update(const DenseFlatTables& tables, const Belief& b, std::uint32_t a, std::uint32_t z,
                           MulCounter& counter);
double obs_prob(const DenseFlatTables& tables, const Belief& b, std::uint32_t a, std::uint32_t z,
                MulCounter& counter);
ValueResult value_of_belief(const AlphaVectorSet& gamma, const Belief& b, MulCounter& counter);

FactoredUpdateResult factored_belief_update(const DenseFactoredTables& tables, const FactoredBelief& fb,
                                            std::uint32_t a, ObservationEvent event, MulCounter& counter);
double factored_obs_prob(const DenseFactoredTables& tables, const FactoredBelief& fb, std::uint32_t a,
                         ObservationEvent event, MulCounter& counter);
ValueResult factored_value(const FactoredAlphaSet& alpha, const FactoredBelief& fb, MulCounter& counter);

}  // namespace counted
}  // namespace fhhop
