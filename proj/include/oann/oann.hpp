#pragma once

// Umbrella header for the whole library.

#include "oann/audit.hpp"
#include "oann/block_store.hpp"
#include "oann/config_file.hpp"
#include "oann/dataset.hpp"
#include "oann/engine.hpp"
#include "oann/errors.hpp"
#include "oann/graph.hpp"
#include "oann/ground_truth.hpp"
#include "oann/io_trace.hpp"
#include "oann/oram.hpp"
#include "oann/oram_params.hpp"
#include "oann/oram_sim.hpp"
#include "oann/packed_index.hpp"
#include "oann/pq.hpp"
#include "oann/rng.hpp"
#include "oann/sealing.hpp"
#include "oann/serial.hpp"
#include "oann/stats.hpp"
#include "oann/vecio.hpp"
