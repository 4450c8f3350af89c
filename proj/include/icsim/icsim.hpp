#pragma once

// Umbrella header. The live model client (icsim/llm_client.hpp) and the
// harness pull in cpp-httplib with OpenSSL and are included separately.

#include "icsim/actuator.hpp"
#include "icsim/canonical_json.hpp"
#include "icsim/continuum.hpp"
#include "icsim/decider.hpp"
#include "icsim/decision.hpp"
#include "icsim/heuristic.hpp"
#include "icsim/hpa.hpp"
#include "icsim/intent.hpp"
#include "icsim/mano.hpp"
#include "icsim/metrics.hpp"
#include "icsim/prompt.hpp"
#include "icsim/routing.hpp"
#include "icsim/scenario.hpp"
#include "icsim/sim.hpp"
#include "icsim/snapshot.hpp"
#include "icsim/telemetry.hpp"
#include "icsim/trace_io.hpp"
