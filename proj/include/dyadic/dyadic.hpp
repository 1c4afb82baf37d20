#pragma once

#include "dyadic/characterization.hpp"
#include "dyadic/cubes.hpp"
#include "dyadic/error.hpp"
#include "dyadic/metric.hpp"
#include "dyadic/nets.hpp"
#include "dyadic/partial_order.hpp"
#include "dyadic/plumpness.hpp"
