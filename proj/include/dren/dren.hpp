#pragma once

#include "dren/affinity.hpp"
#include "dren/checkpoint.hpp"
#include "dren/dataset.hpp"
#include "dren/divergence.hpp"
#include "dren/encoder.hpp"
#include "dren/error.hpp"
#include "dren/eval.hpp"
#include "dren/gradcheck.hpp"
#include "dren/histogram.hpp"
#include "dren/matrix.hpp"
#include "dren/report.hpp"
#include "dren/rng.hpp"
#include "dren/svg.hpp"
#include "dren/trainer.hpp"
#include "dren/tsne.hpp"
