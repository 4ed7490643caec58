#pragma once

#include "qlearn/core/rng.hpp"
#include "qlearn/nn/architecture.hpp"
#include "qlearn/nn/network.hpp"
#include "qlearn/optim/rmsprop.hpp"
#include "qlearn/optim/target.hpp"
#include "qlearn/replay/replay_memory.hpp"
#include "qlearn/replay/schedule.hpp"
#include "qlearn/replay/sum_tree.hpp"
#include "qlearn/envs/registry.hpp"
#include "qlearn/envs/preprocess.hpp"
#include "qlearn/agent/evaluate.hpp"
#include "qlearn/agent/learner.hpp"
#include "qlearn/agent/targets.hpp"
#include "qlearn/agent/trainer.hpp"
#include "qlearn/config.hpp"
