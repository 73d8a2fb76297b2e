#pragma once

// Umbrella header.

#include "vtgforge/annotation.hpp"
#include "vtgforge/clients.hpp"
#include "vtgforge/collection.hpp"
#include "vtgforge/core.hpp"
#include "vtgforge/eval.hpp"
#include "vtgforge/factory.hpp"
#include "vtgforge/io.hpp"
#include "vtgforge/prompts.hpp"
#include "vtgforge/reward.hpp"
#include "vtgforge/rng.hpp"
#include "vtgforge/text.hpp"
#include "vtgforge/vocab.hpp"
