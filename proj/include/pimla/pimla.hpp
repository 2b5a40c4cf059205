#pragma once

#include "pimla/adaptive.hpp"
#include "pimla/apps.hpp"
#include "pimla/engine.hpp"
#include "pimla/error.hpp"
#include "pimla/experiment.hpp"
#include "pimla/graph_io.hpp"
#include "pimla/kernels.hpp"
#include "pimla/machine.hpp"
#include "pimla/partition.hpp"
#include "pimla/pim_model.hpp"
#include "pimla/semiring.hpp"
#include "pimla/snapshot.hpp"
#include "pimla/sparse.hpp"
