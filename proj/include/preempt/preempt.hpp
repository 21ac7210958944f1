#pragma once

#include "preempt/analysis.hpp"
#include "preempt/equilibrium.hpp"
#include "preempt/error.hpp"
#include "preempt/lattice.hpp"
#include "preempt/monte_carlo.hpp"
#include "preempt/payoffs.hpp"
#include "preempt/root_find.hpp"
#include "preempt/stopping.hpp"
#include "preempt/streams_model.hpp"
#include "preempt/threshold.hpp"
