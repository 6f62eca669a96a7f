#pragma once

#include "confmend/values.hpp"
#include "confmend/expr.hpp"
#include "confmend/model.hpp"
#include "confmend/parse.hpp"
#include "confmend/solver.hpp"
#include "confmend/validate.hpp"
#include "confmend/propagate.hpp"
#include "confmend/group.hpp"
#include "confmend/adjust.hpp"
#include "confmend/bench.hpp"
#include "confmend/report.hpp"
