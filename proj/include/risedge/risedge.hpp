#pragma once

#include "risedge/numerics.hpp"
#include "risedge/channel.hpp"
#include "risedge/queueing.hpp"
#include "risedge/accuracy.hpp"
#include "risedge/dpp.hpp"
#include "risedge/allocators.hpp"
#include "risedge/agent.hpp"
#include "risedge/config.hpp"
#include "risedge/sim.hpp"
#include "risedge/output.hpp"
