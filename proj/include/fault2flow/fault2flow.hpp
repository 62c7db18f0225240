#pragma once

#include "fault2flow/compiler.hpp"
#include "fault2flow/config.hpp"
#include "fault2flow/error.hpp"
#include "fault2flow/evolve.hpp"
#include "fault2flow/executor.hpp"
#include "fault2flow/fault_tree.hpp"
#include "fault2flow/metrics.hpp"
#include "fault2flow/mindmap.hpp"
#include "fault2flow/pasta_dsl.hpp"
#include "fault2flow/pipeline.hpp"
#include "fault2flow/regions.hpp"
#include "fault2flow/self_check.hpp"
#include "fault2flow/translate.hpp"
#include "fault2flow/util.hpp"
#include "fault2flow/verify.hpp"
#include "fault2flow/workflow.hpp"
