#pragma once

// Umbrella include for the whole library.

#include "rescu/affinity.hpp"
#include "rescu/caption.hpp"
#include "rescu/crossratio.hpp"
#include "rescu/detect.hpp"
#include "rescu/discover.hpp"
#include "rescu/error.hpp"
#include "rescu/expand.hpp"
#include "rescu/geom.hpp"
#include "rescu/image.hpp"
#include "rescu/json_io.hpp"
#include "rescu/lines.hpp"
#include "rescu/metrics.hpp"
#include "rescu/overlay.hpp"
#include "rescu/pipeline.hpp"
#include "rescu/rectify.hpp"
#include "rescu/synth.hpp"
#include "rescu/types.hpp"
#include "rescu/vanishing.hpp"
#include "rescu/words.hpp"
