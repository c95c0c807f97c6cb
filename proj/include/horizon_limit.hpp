#pragma once

#include "horizon_limit/core.hpp"
#include "horizon_limit/ode.hpp"
#include "horizon_limit/problem.hpp"
#include "horizon_limit/candidate.hpp"
#include "horizon_limit/integrate.hpp"
#include "horizon_limit/maximize.hpp"
#include "horizon_limit/costate.hpp"
#include "horizon_limit/verify.hpp"
#include "horizon_limit/shoot.hpp"
#include "horizon_limit/oracle.hpp"
#include "horizon_limit/io.hpp"
#include "horizon_limit/cli.hpp"
