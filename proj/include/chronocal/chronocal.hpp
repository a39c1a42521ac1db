#pragma once

#include "chronocal/calibration.hpp"
#include "chronocal/core.hpp"
#include "chronocal/duration_predict.hpp"
#include "chronocal/ensemble.hpp"
#include "chronocal/error.hpp"
#include "chronocal/ingest.hpp"
#include "chronocal/jsonl.hpp"
#include "chronocal/metrics.hpp"
#include "chronocal/report.hpp"
