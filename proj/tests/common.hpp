// Shared 15.a1 objects for the unit tests, built once per test binary.

#pragma once

#include "modsym/periods.hpp"

namespace testing15 {

inline const modsym::Eigenform& form() {
    static const modsym::Eigenform f = modsym::make_eigenform(modsym::curve_15a1(), 20000);
    return f;
}

inline const modsym::PeriodTable& table() {
    static const modsym::PeriodTable t = modsym::build_period_table(form(), modsym::TruncationPlan{1e-12, 0.0});
    return t;
}

}  // namespace testing15
