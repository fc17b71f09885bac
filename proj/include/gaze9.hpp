#pragma once

#include "gaze9/augment/augment.hpp"
#include "gaze9/augment/color.hpp"
#include "gaze9/core/eye_state.hpp"
#include "gaze9/core/random.hpp"
#include "gaze9/core/tensor.hpp"
#include "gaze9/estimator/evaluate.hpp"
#include "gaze9/estimator/model.hpp"
#include "gaze9/estimator/train.hpp"
#include "gaze9/estimator/weights.hpp"
#include "gaze9/filter/gaze_filter.hpp"
#include "gaze9/filter/noise_sim.hpp"
#include "gaze9/image/eye_strip.hpp"
#include "gaze9/image/png_io.hpp"
#include "gaze9/service/base64.hpp"
#include "gaze9/service/config.hpp"
#include "gaze9/service/server.hpp"
#include "gaze9/service/session.hpp"
#include "gaze9/service/session_log.hpp"
#include "gaze9/synth/dataset.hpp"
#include "gaze9/synth/eye_synth.hpp"
#include "gaze9/t9/engine.hpp"
#include "gaze9/t9/layout.hpp"
#include "gaze9/t9/metrics.hpp"
