#include "fhhop/counted_kernels.hpp"

#include <limits>
#include <string>

#include "fhhop/errors.hpp"

namespace fhhop {
namespace {

std::size_t checked_product(std::initializer_list<std::size_t> dims) {
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d != 0 && total > kDenseEntryCap / d) {
      throw ModelTooLarge("dense table would exceed " + std::to_string(kDenseEntryCap) + " entries");
    }
    total *= d;
  }
  return total;
}

}  // namespace

DenseFlatTables::DenseFlatTables(const FlatModel& m)
    : s_(m.num_states), a_(m.num_actions), z_(m.num_observations) {
  t_.assign(checked_product({s_, a_, s_}), 0.0);
  o_.assign(checked_product({a_, s_, z_}), 0.0);
  for (std::uint32_t s = 0; s < s_; ++s) {
    for (std::uint32_t a = 0; a < a_; ++a) {
      for (const auto& e : m.transitions(s, a)) t_[(static_cast<std::size_t>(s) * a_ + a) * s_ + e.index] = e.value;
    }
  }
  for (std::uint32_t a = 0; a < a_; ++a) {
    for (std::uint32_t s = 0; s < s_; ++s) {
      for (const auto& e : m.observations(a, s)) o_[(static_cast<std::size_t>(a) * s_ + s) * z_ + e.index] = e.value;
    }
  }
}

DenseFactoredTables::DenseFactoredTables(const FactoredModel& m)
    : x_(m.num_x), y_(m.num_y), a_(m.num_actions), z_(m.num_observations) {
  tx_.assign(checked_product({x_, y_, a_, x_}), 0.0);
  ty_.assign(checked_product({x_, y_, a_, x_, y_}), 0.0);
  o_.assign(checked_product({a_, x_, y_, z_}), 0.0);
  for (std::uint32_t x = 0; x < x_; ++x) {
    for (std::uint32_t y = 0; y < y_; ++y) {
      for (std::uint32_t a = 0; a < a_; ++a) {
        const auto row = m.next_x(x, y, a);
        const std::size_t base = (static_cast<std::size_t>(x) * y_ + y) * a_ + a;
        for (std::size_t k = 0; k < row.size(); ++k) {
          tx_[base * x_ + row[k].index] = row[k].value;
          for (const auto& e : m.next_y(x, y, a, k)) ty_[(base * x_ + row[k].index) * y_ + e.index] = e.value;
        }
      }
    }
  }
  for (std::uint32_t a = 0; a < a_; ++a) {
    for (std::uint32_t nx = 0; nx < x_; ++nx) {
      for (std::uint32_t ny = 0; ny < y_; ++ny) {
        for (const auto& e : m.observations(a, nx, ny)) {
          o_[((static_cast<std::size_t>(a) * x_ + nx) * y_ + ny) * z_ + e.index] = e.value;
        }
      }
    }
  }
}

namespace counted {
namespace {

std::vector<double> predict(const DenseFlatTables& t, const Belief& b, std::uint32_t a, MulCounter& counter) {
  const std::uint32_t n = t.num_states();
  std::vector<double> pred(n, 0.0);
  for (std::uint32_t next = 0; next < n; ++next) {
    double acc = 0.0;
    for (std::uint32_t s = 0; s < n; ++s) acc += t.transition(s, a, next) * b.probs[s];
    counter.count += n;
    pred[next] = acc;
  }
  return pred;
}

std::vector<double> predict(const DenseFactoredTables& t, const FactoredBelief& fb, std::uint32_t a,
                            std::uint32_t nx, MulCounter& counter) {
  const std::uint32_t n = t.num_y();
  std::vector<double> pred(n, 0.0);
  for (std::uint32_t ny = 0; ny < n; ++ny) {
    double acc = 0.0;
    for (std::uint32_t y = 0; y < n; ++y) {
      const double joint = t.transition_x(fb.x, y, a, nx) * t.transition_y(fb.x, y, a, nx, ny);
      acc += joint * fb.dist_y[y];
    }
    counter.count += 2ull * n;
    pred[ny] = acc;
  }
  return pred;
}

template <typename ObsFn>
double observe_and_normalize(std::vector<double>& pred, ObsFn&& obs, MulCounter& counter) {
  double eta = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] *= obs(i);
    eta += pred[i];
  }
  counter.count += pred.size();
  if (eta < kImpossibleObservation) throw ImpossibleObservation("observation has probability below threshold");
  const double inv = 1.0 / eta;
  for (double& p : pred) p *= inv;
  counter.count += pred.size();
  return eta;
}

}  // namespace

UpdateResult belief_update(const DenseFlatTables& t, const Belief& b, std::uint32_t a, std::uint32_t z,
                           MulCounter& counter) {
  std::vector<double> pred = predict(t, b, a, counter);
  const double eta = observe_and_normalize(
      pred, [&](std::size_t i) { return t.observation(a, static_cast<std::uint32_t>(i), z); }, counter);
  return {Belief{std::move(pred)}, eta};
}

double obs_prob(const DenseFlatTables& t, const Belief& b, std::uint32_t a, std::uint32_t z, MulCounter& counter) {
  const std::vector<double> pred = predict(t, b, a, counter);
  double eta = 0.0;
  for (std::uint32_t next = 0; next < t.num_states(); ++next) {
    if (t.observation(a, next, z) != 0.0) eta += t.observation(a, next, z) * pred[next];
  }
  return eta;
}

ValueResult value_of_belief(const AlphaVectorSet& gamma, const Belief& b, MulCounter& counter) {
  ValueResult best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < gamma.vectors.size(); ++i) {
    double v = 0.0;
    for (std::size_t s = 0; s < b.probs.size(); ++s) v += gamma.vectors[i].values[s] * b.probs[s];
    counter.count += b.probs.size();
    if (v > best.value) best = {v, i};
  }
  return best;
}

FactoredUpdateResult factored_belief_update(const DenseFactoredTables& t, const FactoredBelief& fb, std::uint32_t a,
                                            ObservationEvent event, MulCounter& counter) {
  std::vector<double> pred = predict(t, fb, a, event.x, counter);
  const double eta = observe_and_normalize(
      pred, [&](std::size_t i) { return t.observation(a, event.x, static_cast<std::uint32_t>(i), event.z); },
      counter);
  return {FactoredBelief{event.x, std::move(pred)}, eta};
}

double factored_obs_prob(const DenseFactoredTables& t, const FactoredBelief& fb, std::uint32_t a,
                         ObservationEvent event, MulCounter& counter) {
  const std::vector<double> pred = predict(t, fb, a, event.x, counter);
  double eta = 0.0;
  for (std::uint32_t ny = 0; ny < t.num_y(); ++ny) {
    const double o = t.observation(a, event.x, ny, event.z);
    if (o != 0.0) eta += o * pred[ny];
  }
  return eta;
}

ValueResult factored_value(const FactoredAlphaSet& alpha, const FactoredBelief& fb, MulCounter& counter) {
  const auto& block = alpha.per_x[fb.x];
  ValueResult best{-std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < block.size(); ++i) {
    double v = 0.0;
    for (std::size_t y = 0; y < fb.dist_y.size(); ++y) v += block[i].values[y] * fb.dist_y[y];
    counter.count += fb.dist_y.size();
    if (v > best.value) best = {v, i};
  }
  return best;
}

}  // namespace counted
}  // namespace fhhop
