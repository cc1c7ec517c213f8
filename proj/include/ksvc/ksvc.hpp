#pragma once

#include "ksvc/combinatorics.hpp"
#include "ksvc/errors.hpp"
#include "ksvc/flow.hpp"
#include "ksvc/instances.hpp"
#include "ksvc/io.hpp"
#include "ksvc/list_builder.hpp"
#include "ksvc/metric.hpp"
#include "ksvc/oracle.hpp"
#include "ksvc/partition.hpp"
#include "ksvc/rng.hpp"
#include "ksvc/sampling.hpp"
#include "ksvc/solver.hpp"
#include "ksvc/streaming.hpp"
#include "ksvc/verify.hpp"
