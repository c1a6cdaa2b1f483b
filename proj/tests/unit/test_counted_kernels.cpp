#include <random>

#include "doctest.h"
#include "fhhop/counted_kernels.hpp"
#include "fhhop/errors.hpp"
#include "random_models.hpp"

using namespace fhhop;
using namespace fhhop::testing;

namespace {

FactoredModel grid_model(std::mt19937_64& rng, std::uint32_t nx, std::uint32_t ny) {
  RandomFactoredOptions o;
  o.num_x = nx;
  o.num_y = ny;
  o.actions = 2;
  o.observations = 3;
  o.max_support = 3;
  return random_factored_model(rng, o);
}

}  // namespace

TEST_CASE("multiplication counts follow the dimension formulas") {
  std::mt19937_64 rng(29);
  for (std::uint32_t nx : {1u, 2u, 5u, 10u}) {
    for (std::uint32_t ny : {2u, 5u, 10u}) {
      CAPTURE(nx);
      CAPTURE(ny);
      const FactoredModel m = grid_model(rng, nx, ny);
      const FlatModel f = to_flat(m);
      const DenseFactoredTables ft(m);
      const DenseFlatTables dt(f);
      const std::uint64_t s = static_cast<std::uint64_t>(nx) * ny;
      const FactoredBelief fb{0, random_distribution(rng, ny)};
      const Belief b = embed_belief(m, fb);
      const auto succ = successors(m, fb, 1);
      const auto event = succ.front().event;

      MulCounter flat_update, fact_update, flat_obs, fact_obs, flat_value, fact_value;
      const auto fu = counted::belief_update(dt, b, 1, flat_observation_index(m, event), flat_update);
      const auto gu = counted::factored_belief_update(ft, fb, 1, event, fact_update);
      CHECK(flat_update.count == s * s + 2 * s);
      CHECK(fact_update.count == 2ull * ny * ny + 2ull * ny);
      CHECK(fu.obs_prob == doctest::Approx(gu.obs_prob).epsilon(1e-12));
      for (std::uint32_t y = 0; y < ny; ++y) {
        CHECK(gu.belief.dist_y[y] == doctest::Approx(succ.front().belief.dist_y[y]).epsilon(1e-12));
        CHECK(fu.belief.probs[event.x * ny + y] == doctest::Approx(gu.belief.dist_y[y]).epsilon(1e-12));
      }

      const double po = counted::obs_prob(dt, b, 1, flat_observation_index(m, event), flat_obs);
      const double qo = counted::factored_obs_prob(ft, fb, 1, event, fact_obs);
      CHECK(flat_obs.count == s * s);
      CHECK(fact_obs.count == 2ull * ny * ny);
      CHECK(po == doctest::Approx(succ.front().prob).epsilon(1e-12));
      CHECK(qo == doctest::Approx(succ.front().prob).epsilon(1e-12));

      const std::size_t gamma_size = 7;
      AlphaVectorSet joint;
      FactoredAlphaSet sliced;
      sliced.per_x.resize(nx);
      for (std::size_t i = 0; i < gamma_size; ++i) {
        AlphaVector v{random_distribution(rng, s), 0};
        for (std::uint32_t x = 0; x < nx; ++x) {
          sliced.per_x[x].push_back(
              AlphaVector{std::vector<double>(v.values.begin() + x * ny, v.values.begin() + (x + 1) * ny), 0});
        }
        joint.vectors.push_back(std::move(v));
      }
      const auto jv = counted::value_of_belief(joint, b, flat_value);
      const auto sv = counted::factored_value(sliced, fb, fact_value);
      CHECK(flat_value.count == gamma_size * s);
      CHECK(fact_value.count == sliced.per_x[0].size() * ny);
      CHECK(jv.value == doctest::Approx(sv.value).epsilon(1e-12));
      CHECK(jv.index == sv.index);
    }
  }
}

TEST_CASE("flat kernel counts on a wrapped flat model") {
  const FlatModel f = two_state_model();
  const DenseFlatTables t(f);
  MulCounter c;
  const auto r = counted::belief_update(t, Belief{{0.6, 0.4}}, 0, 0, c);
  CHECK(c.count == 2 * 2 + 2 * 2);
  CHECK(r.belief.probs[0] == doctest::Approx(0.336 / 0.394));
}

TEST_CASE("dense tables refuse oversized models") {
  FlatModel f;
  f.num_states = 1u << 14;
  f.num_actions = 1;
  f.num_observations = 1;
  CHECK_THROWS_AS(DenseFlatTables{f}, ModelTooLarge);
}

TEST_CASE("counted update reports impossible observations") {
  FlatModel f = two_state_model();
  f.observation = SparseRows::from_triplets(4, {{0, 0, 1.0}, {1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}});
  const DenseFlatTables t(f);
  MulCounter c;
  CHECK_THROWS_AS(counted::belief_update(t, Belief{{0.5, 0.5}}, 0, 1, c), ImpossibleObservation);
}
