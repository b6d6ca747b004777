#pragma once

#include "breathwatch/breath.hpp"
#include "breathwatch/edge.hpp"
#include "breathwatch/eval.hpp"
#include "breathwatch/frame_io.hpp"
#include "breathwatch/image.hpp"
#include "breathwatch/motion.hpp"
#include "breathwatch/parallel.hpp"
#include "breathwatch/pipeline.hpp"
#include "breathwatch/roi.hpp"
#include "breathwatch/synth.hpp"
