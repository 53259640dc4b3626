#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "latred/theta.hpp"

namespace latred {

// Extended-precision real for the --extended mode: 50 significant digits,
// plenty past the >= 30 the mode promises.
using wide = boost::multiprecision::cpp_bin_float_50;

inline theta_tols<wide> wide_tols() {
    theta_tols<wide> t;
    t.series_rel_tail = wide("1e-40");
    t.root_abs = wide("1e-35");
    t.root_rel = wide("1e-30");
    return t;
}

}  // namespace latred
