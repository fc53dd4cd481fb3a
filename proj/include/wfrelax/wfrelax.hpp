#pragma once

#include "wfrelax/checker.hpp"
#include "wfrelax/constraints.hpp"
#include "wfrelax/error.hpp"
#include "wfrelax/pipeline.hpp"
#include "wfrelax/relations.hpp"
#include "wfrelax/relaxation.hpp"
#include "wfrelax/sqlgen.hpp"
#include "wfrelax/wfnet.hpp"
