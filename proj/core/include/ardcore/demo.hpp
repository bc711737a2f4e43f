#pragma once

#include "ardcore/config.hpp"

namespace ard {

/// Single inverter behind one branch to the slack; white-box surrogate.
/// The smallest system on which the whole chain (modes, reachable domain,
/// penetration index) is exercised and cross-checked against the
/// interconnection eigensolver.
RunConfig demo_two_bus_config();

/// Four buses (slack, junction with load, two inverters); gray-box path:
/// transient identification, rational surrogate fit, full assessment of the
/// target inverter bus.
RunConfig demo_four_bus_config();

/// Seven-bus feeder with four inverter buses of varying grid strength and
/// control tuning; used for the ranking report where the penetration index
/// disagrees with the short-circuit-ratio ordering.
RunConfig demo_multibus_config();

}  // namespace ard
