#pragma once

#include "safeor/config.hpp"
#include "safeor/core.hpp"
#include "safeor/episode.hpp"
#include "safeor/errors.hpp"
#include "safeor/harness/oracle.hpp"
#include "safeor/harness/policies.hpp"
#include "safeor/harness/registry.hpp"
#include "safeor/harness/runner.hpp"
