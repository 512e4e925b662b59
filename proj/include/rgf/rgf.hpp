#pragma once

#include "rgf/benchmarks.hpp"
#include "rgf/common.hpp"
#include "rgf/distributions.hpp"
#include "rgf/gaussian_filter.hpp"
#include "rgf/integration.hpp"
#include "rgf/io.hpp"
#include "rgf/linalg.hpp"
#include "rgf/linear_example.hpp"
#include "rgf/models.hpp"
#include "rgf/radar.hpp"
#include "rgf/random.hpp"
#include "rgf/robust_feature.hpp"
#include "rgf/selftest.hpp"
