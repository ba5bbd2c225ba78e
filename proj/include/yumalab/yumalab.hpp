#pragma once

#include "consensus.hpp"
#include "errors.hpp"
#include "ingest.hpp"
#include "interventions.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "numfmt.hpp"
#include "parallel.hpp"
#include "sweep.hpp"
#include "synth.hpp"
#include "time.hpp"
