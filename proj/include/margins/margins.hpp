#pragma once

#include "margins/error.hpp"
#include "margins/instance.hpp"
#include "margins/lp.hpp"
#include "margins/margin.hpp"
#include "margins/algorithms.hpp"
#include "margins/theorems.hpp"
#include "margins/generate.hpp"
#include "margins/summary.hpp"
#include "margins/io.hpp"
