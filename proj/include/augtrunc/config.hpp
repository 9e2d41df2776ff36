#pragma once

#include <string>

#include "augtrunc/families.hpp"
#include "augtrunc/sweep.hpp"

namespace augtrunc {

/// Parses a JSON sweep configuration. Unknown keys, wrong types and
/// out-of-range values throw Error{InvalidConfig}.
///
///   {
///     "model":   {"family": "example53", "params": {}},
///     "scheme":  {"scheme": "censored", "outer": "auto"},  // or "exact", or N
///                | {"scheme": "linear", "anchor": 0} | "last_column",
///     "g":       "default" | "identity" | {"type": "power", "exponent": 2} | ...,
///     "anchor":  0,
///     "probes":  [0, 5],
///     "grid":    {"n_min": 10, "n_max": 26, "step": 2},
///     "output":  {"csv": "out.csv", "json": "out.json", "timing": false},
///     "tolerances": {"window": 4, "rtol": 1e-6},
///     "expect_converged": false
///   }
///
/// The grid may be omitted for finite families; it then covers the full chain.
SweepConfig parse_sweep_config(const std::string& text);
SweepConfig load_sweep_config(const std::string& path);

/// The "model" object on its own.
FamilyParams parse_family(const std::string& text);

}  // namespace augtrunc
