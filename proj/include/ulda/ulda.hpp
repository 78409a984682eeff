#pragma once

#include "ulda/annotator_sim.hpp"
#include "ulda/config.hpp"
#include "ulda/cwl.hpp"
#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/harness.hpp"
#include "ulda/io.hpp"
#include "ulda/label_dist.hpp"
#include "ulda/metrics.hpp"
#include "ulda/regressors.hpp"
#include "ulda/report.hpp"
#include "ulda/rng.hpp"
#include "ulda/svg.hpp"
#include "ulda/tns.hpp"
