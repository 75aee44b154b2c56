#pragma once

// Umbrella header. Include individual module headers where compile time
// matters; live.hpp is intentionally excluded because it pulls in an HTTP
// stack most users of the library never touch.

#include "webscout/corpus.hpp"
#include "webscout/harness.hpp"
#include "webscout/html.hpp"
#include "webscout/llm.hpp"
#include "webscout/orchestrator.hpp"
#include "webscout/policies.hpp"
#include "webscout/primitives.hpp"
#include "webscout/prompts.hpp"
#include "webscout/protocol.hpp"
#include "webscout/sandbox.hpp"
#include "webscout/search_types.hpp"
#include "webscout/tool_builtins.hpp"
#include "webscout/tools.hpp"
#include "webscout/trace.hpp"
#include "webscout/util.hpp"
