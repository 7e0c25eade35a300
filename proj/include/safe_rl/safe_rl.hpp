#pragma once

#include "safe_rl/action_set.hpp"
#include "safe_rl/actor.hpp"
#include "safe_rl/critic.hpp"
#include "safe_rl/env_io.hpp"
#include "safe_rl/errors.hpp"
#include "safe_rl/gridworld.hpp"
#include "safe_rl/kernel_svm.hpp"
#include "safe_rl/presets.hpp"
#include "safe_rl/serialize.hpp"
#include "safe_rl/trainer.hpp"
#include "safe_rl/validation.hpp"
