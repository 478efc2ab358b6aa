#pragma once

#include "normflow/error.hpp"
#include "normflow/exp_polynomial.hpp"
#include "normflow/flow.hpp"
#include "normflow/io.hpp"
#include "normflow/majorant.hpp"
#include "normflow/multi_index.hpp"
#include "normflow/parallel.hpp"
#include "normflow/resonance.hpp"
#include "normflow/series.hpp"
#include "normflow/siegel.hpp"

namespace normflow {

inline constexpr const char* library_version()
{
#ifdef NORMFLOW_VERSION
    return NORMFLOW_VERSION;
#else
    return "0.1.0";
#endif
}

} // namespace normflow
