#pragma once

#include "params.hpp"
#include "numeric.hpp"
#include "partial_fraction.hpp"
#include "exppoly.hpp"
#include "chain.hpp"
#include "lst.hpp"
#include "palm.hpp"
#include "age.hpp"
#include "theorem.hpp"
#include "sim.hpp"
#include "report.hpp"
