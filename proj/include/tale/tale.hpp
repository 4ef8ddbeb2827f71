#pragma once

// Umbrella header for the tale library: global top-k approximate functional
// dependency discovery under the mu+ measure.

#include "tale/attr_set.hpp"
#include "tale/csv.hpp"
#include "tale/measure.hpp"
#include "tale/oracle.hpp"
#include "tale/relation.hpp"
#include "tale/report.hpp"
#include "tale/search.hpp"
#include "tale/topk.hpp"
