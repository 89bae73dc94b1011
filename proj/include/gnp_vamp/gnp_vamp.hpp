#pragma once

// Library surface without the test oracles (see gnp_vamp/oracles/).

#include "gnp_vamp/denoisers.hpp"
#include "gnp_vamp/engine.hpp"
#include "gnp_vamp/errors.hpp"
#include "gnp_vamp/harness/instance.hpp"
#include "gnp_vamp/harness/io.hpp"
#include "gnp_vamp/harness/sweep.hpp"
#include "gnp_vamp/lmmse.hpp"
#include "gnp_vamp/messages.hpp"
#include "gnp_vamp/metrics.hpp"
#include "gnp_vamp/priors.hpp"
#include "gnp_vamp/version.hpp"
