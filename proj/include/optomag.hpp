#pragma once

#include "optomag/config.hpp"
#include "optomag/energy.hpp"
#include "optomag/error.hpp"
#include "optomag/export.hpp"
#include "optomag/optics.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/random.hpp"
#include "optomag/rig.hpp"
#include "optomag/run.hpp"
#include "optomag/shutter.hpp"
#include "optomag/synapse.hpp"
#include "optomag/trainer.hpp"
#include "optomag/weight_engine.hpp"
