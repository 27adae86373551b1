#pragma once

#include "nashflow/checker.hpp"
#include "nashflow/decomposition.hpp"
#include "nashflow/engine.hpp"
#include "nashflow/generator.hpp"
#include "nashflow/json_io.hpp"
#include "nashflow/linalg.hpp"
#include "nashflow/network.hpp"
#include "nashflow/piecewise.hpp"
#include "nashflow/profile.hpp"
#include "nashflow/rational.hpp"
#include "nashflow/super_sink.hpp"
#include "nashflow/thin_flow.hpp"
