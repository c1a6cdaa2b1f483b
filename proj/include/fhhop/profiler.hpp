#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>

namespace fhhop {

// The three primitive families that dominate online planning time.
enum class PrimitiveFamily : std::size_t {
  BeliefUpdate = 0,
  ObservationProbability = 1,
  ValueEvaluation = 2,
};

inline constexpr std::size_t kPrimitiveFamilies = 3;

struct ProfileTotals {
  std::array<double, kPrimitiveFamilies> seconds{};
  std::array<std::uint64_t, kPrimitiveFamilies> calls{};

  ProfileTotals& operator+=(const ProfileTotals& other) {
    for (std::size_t i = 0; i < kPrimitiveFamilies; ++i) {
      seconds[i] += other.seconds[i];
      calls[i] += other.calls[i];
    }
    return *this;
  }
};

class Profiler {
 public:
  void add(PrimitiveFamily family, double seconds) {
    totals_.seconds[static_cast<std::size_t>(family)] += seconds;
    ++totals_.calls[static_cast<std::size_t>(family)];
  }
  const ProfileTotals& totals() const noexcept { return totals_; }
  void reset() { totals_ = {}; }

 private:
  ProfileTotals totals_;
};

/// Charges the enclosing scope's wall time to one family. A null profiler
/// makes this a no-op.
class ProfileScope {
 public:
  ProfileScope(Profiler* profiler, PrimitiveFamily family) : profiler_(profiler), family_(family) {
    if (profiler_ != nullptr) start_ = std::chrono::steady_clock::now();
  }
  ~ProfileScope() {
    if (profiler_ != nullptr) {
      const auto elapsed = std::chrono::steady_clock::now() - start_;
      profiler_->add(family_, std::chrono::duration<double>(elapsed).count());
    }
  }
  ProfileScope(const ProfileScope&) = delete;
  ProfileScope& operator=(const ProfileScope&) = delete;

 private:
  Profiler* profiler_;
  PrimitiveFamily family_;
  std::chrono::steady_clock::time_point start_{};
};

}  // namespace fhhop
