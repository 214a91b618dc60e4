#pragma once

#include "cqed/errors.hpp"
#include "cqed/fockspace.hpp"
#include "cqed/krylov.hpp"
#include "cqed/hamiltonians.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/analytics.hpp"
#include "cqed/experiments/config.hpp"
#include "cqed/experiments/scenarios.hpp"
#include "cqed/experiments/emit.hpp"
