#pragma once

#include "dimcert/bell_bounds.hpp"
#include "dimcert/correlation.hpp"
#include "dimcert/error.hpp"
#include "dimcert/generators.hpp"
#include "dimcert/json_format.hpp"
#include "dimcert/pm_bound.hpp"
#include "dimcert/realization.hpp"
#include "dimcert/realization_search.hpp"
#include "dimcert/simplex_opt.hpp"
#include "dimcert/witnesses.hpp"
