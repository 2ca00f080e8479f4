#pragma once

#include "driftwatch/benchmark.hpp"
#include "driftwatch/canonical.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/error.hpp"
#include "driftwatch/ingest.hpp"
#include "driftwatch/interpreter.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/registry.hpp"
#include "driftwatch/stats.hpp"
#include "driftwatch/store.hpp"
#include "driftwatch/summarizer.hpp"
#include "driftwatch/typer.hpp"
