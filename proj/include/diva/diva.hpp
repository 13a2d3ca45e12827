#pragma once

#include "diva/errors.hpp"
#include "diva/io.hpp"
#include "diva/latent.hpp"
#include "diva/peaks.hpp"
#include "diva/pipeline.hpp"
#include "diva/plot.hpp"
#include "diva/preprocess.hpp"
#include "diva/spectrum.hpp"
#include "diva/synth.hpp"
#include "diva/vae.hpp"
