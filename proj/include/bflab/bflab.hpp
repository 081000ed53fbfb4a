#pragma once

#include "bflab/version.hpp"
#include "bflab/rng.hpp"
#include "bflab/tensor.hpp"
#include "bflab/model.hpp"
#include "bflab/zoo.hpp"
#include "bflab/data.hpp"
#include "bflab/train.hpp"
#include "bflab/quantize.hpp"
#include "bflab/bitspace.hpp"
#include "bflab/metrics.hpp"
#include "bflab/attack.hpp"
#include "bflab/memsim.hpp"
#include "bflab/harness.hpp"
#include "bflab/model_io.hpp"
#include "bflab/serialize.hpp"
