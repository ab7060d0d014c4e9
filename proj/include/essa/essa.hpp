#pragma once
// Umbrella header for the whole library.

#include "essa/channel.hpp"
#include "essa/codec.hpp"
#include "essa/fft.hpp"
#include "essa/montecarlo.hpp"
#include "essa/phy.hpp"
#include "essa/profiles.hpp"
#include "essa/receiver.hpp"
#include "essa/report.hpp"
#include "essa/rng.hpp"
#include "essa/selftest.hpp"
