#include <doctest.h>

#include "divbound/ext_real.hpp"

using divbound::ExtReal;

TEST_CASE("extended addition keeps the +inf dominance convention") {
  const ExtReal pinf = ExtReal::pos_inf();
  const ExtReal ninf = ExtReal::neg_inf();
  CHECK((pinf + ninf).is_pos_inf());
  CHECK((ninf + pinf).is_pos_inf());
  CHECK((ninf + ninf).is_neg_inf());
  CHECK((pinf + ExtReal(3.0)).is_pos_inf());
  CHECK((ExtReal(2.0) + ExtReal(-5.0)).value() == doctest::Approx(-3.0));
  CHECK((pinf - pinf).is_pos_inf());  // a - b = a + (-b)
}

TEST_CASE("zero times infinity is zero") {
  CHECK((ExtReal(0.0) * ExtReal::pos_inf()).value() == 0.0);
  CHECK((ExtReal::neg_inf() * ExtReal(0.0)).value() == 0.0);
  CHECK((ExtReal(-2.0) * ExtReal::pos_inf()).is_neg_inf());
  CHECK((ExtReal::neg_inf() * ExtReal(-1.0)).is_pos_inf());
}

TEST_CASE("total order ranks -inf < finite < +inf") {
  CHECK(ExtReal::neg_inf() < ExtReal(-1e300));
  CHECK(ExtReal(1e300) < ExtReal::pos_inf());
  CHECK(ExtReal(1.0) < ExtReal(2.0));
  CHECK(ExtReal::neg_inf() < ExtReal::pos_inf());
  CHECK(divbound::max(ExtReal(1.0), ExtReal::pos_inf()).is_pos_inf());
}

TEST_CASE("ieee infinities round-trip through construction") {
  const ExtReal x(std::numeric_limits<double>::infinity());
  CHECK(x.is_pos_inf());
  CHECK(x.as_double() == std::numeric_limits<double>::infinity());
}
