#pragma once

#include "alkit/albl.hpp"
#include "alkit/dwus.hpp"
#include "alkit/eer.hpp"
#include "alkit/error.hpp"
#include "alkit/experiment.hpp"
#include "alkit/factory.hpp"
#include "alkit/labelers.hpp"
#include "alkit/libsvm.hpp"
#include "alkit/matrix.hpp"
#include "alkit/models.hpp"
#include "alkit/pool.hpp"
#include "alkit/qbc.hpp"
#include "alkit/random.hpp"
#include "alkit/random_sampling.hpp"
#include "alkit/strategy.hpp"
#include "alkit/uncertainty.hpp"
