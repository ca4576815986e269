#pragma once

#include "qrelgauge/error.hpp"
#include "qrelgauge/io.hpp"
#include "qrelgauge/metrics.hpp"
#include "qrelgauge/model.hpp"
#include "qrelgauge/parallel.hpp"
#include "qrelgauge/pooling.hpp"
#include "qrelgauge/rankstats.hpp"
#include "qrelgauge/report.hpp"
#include "qrelgauge/rng.hpp"
#include "qrelgauge/selection.hpp"
#include "qrelgauge/special.hpp"
#include "qrelgauge/synth.hpp"
