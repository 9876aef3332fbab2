#pragma once

// Umbrella header for the full pipeline.

#include "janus/config.hpp"
#include "janus/context.hpp"
#include "janus/dataset.hpp"
#include "janus/determination.hpp"
#include "janus/detection.hpp"
#include "janus/domain.hpp"
#include "janus/embedding.hpp"
#include "janus/evaluation.hpp"
#include "janus/inside_investigation.hpp"
#include "janus/judge.hpp"
#include "janus/llm_gateway.hpp"
#include "janus/outside_investigation.hpp"
#include "janus/pipeline.hpp"
#include "janus/result.hpp"
#include "janus/stage_cache.hpp"
