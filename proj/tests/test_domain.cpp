#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dipps/domain.hpp"

using namespace dipps;

namespace {

TimeGrid day24() { return TimeGrid{0, 24, 1.0}; }

PowerProfile flat(double v, int n, ProfileKind k) {
  return PowerProfile{std::vector<double>(n, v), k};
}

TariffSchedule flat_tariff(double buy, double sell, int n) {
  return TariffSchedule{std::vector<double>(n, buy), std::vector<double>(n, sell)};
}

SellWindowMask zero_mask(int n) { return SellWindowMask{std::vector<std::uint8_t>(n, 0), 0.0}; }

}  // namespace

TEST_CASE("paper-default constructor fixes charge and discharge caps") {
  auto ess = EssParams::with_defaults(20.0);
  CHECK(ess.p_charge_max_kw == 0.4 * 20.0);
  CHECK(ess.p_discharge_max_kw == 0.2 * 20.0);
  CHECK(ess.soc_min == 0.2);
  CHECK(ess.soc_max == 0.8);
  CHECK(ess.soc_initial == 0.5);
}

TEST_CASE("consistent 24-step scenario validates") {
  MicrogridParams p{EssParams::with_defaults(20.0), 5.0, 10.0};
  auto r = validate_scenario(p, day24(), flat(1.0, 24, ProfileKind::Load),
                             flat(0.5, 24, ProfileKind::Pv),
                             flat_tariff(0.2, 0.16, 24), zero_mask(24));
  REQUIRE(r.ok());
  CHECK(r.scenario->load_at(3) == 1.0);
  CHECK(r.scenario->load_at(27) == 1.0);  // wraps
}

TEST_CASE("length mismatch names the offending series") {
  MicrogridParams p{EssParams::with_defaults(20.0), 5.0, 10.0};
  auto r = validate_scenario(p, day24(), flat(1.0, 23, ProfileKind::Load),
                             flat(0.5, 24, ProfileKind::Pv),
                             flat_tariff(0.2, 0.16, 24), zero_mask(24));
  REQUIRE(!r.ok());
  bool found = false;
  for (const auto& e : r.errors)
    if (e.code == "LengthMismatch" && e.detail == "load") found = true;
  CHECK(found);
}

TEST_CASE("inverted soc bounds are reported") {
  auto ess = EssParams::with_defaults(20.0);
  ess.soc_min = 0.9;
  ess.soc_max = 0.8;
  ess.soc_initial = 0.85;
  ess.soc_final_target = 0.85;
  MicrogridParams p{ess, 5.0, 10.0};
  auto r = validate_scenario(p, day24(), flat(1.0, 24, ProfileKind::Load),
                             flat(0.5, 24, ProfileKind::Pv),
                             flat_tariff(0.2, 0.16, 24), zero_mask(24));
  REQUIRE(!r.ok());
  bool found = false;
  for (const auto& e : r.errors)
    if (e.code == "InvariantViolation" && e.detail == "soc_min < soc_max") found = true;
  CHECK(found);
}

TEST_CASE("validation is total over junk inputs") {
  // negative load, NaN price, bad mask entry: all reported, none clamped
  MicrogridParams p{EssParams::with_defaults(20.0), 5.0, 10.0};
  PowerProfile bad_load = flat(1.0, 24, ProfileKind::Load);
  bad_load.values[5] = -2.0;
  TariffSchedule bad_tariff = flat_tariff(0.2, 0.16, 24);
  bad_tariff.sell_price[0] = std::nan("");
  SellWindowMask bad_mask = zero_mask(24);
  bad_mask.mask[3] = 7;
  auto r = validate_scenario(p, day24(), bad_load, flat(0.5, 24, ProfileKind::Pv),
                             bad_tariff, bad_mask);
  REQUIRE(!r.ok());
  CHECK(r.errors.size() >= 3);
}
