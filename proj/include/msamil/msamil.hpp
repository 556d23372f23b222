#pragma once

#include "msamil/classifier.hpp"
#include "msamil/config.hpp"
#include "msamil/core.hpp"
#include "msamil/error.hpp"
#include "msamil/image.hpp"
#include "msamil/inference.hpp"
#include "msamil/manifest.hpp"
#include "msamil/metrics.hpp"
#include "msamil/mil_trainer.hpp"
#include "msamil/network.hpp"
#include "msamil/pipeline.hpp"
#include "msamil/png_io.hpp"
#include "msamil/report.hpp"
#include "msamil/rng.hpp"
#include "msamil/segmenter.hpp"
#include "msamil/synth.hpp"
#include "msamil/tiler.hpp"
