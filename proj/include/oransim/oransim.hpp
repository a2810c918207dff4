#pragma once

#include "oransim/blockchain.hpp"
#include "oransim/broker.hpp"
#include "oransim/engine.hpp"
#include "oransim/error.hpp"
#include "oransim/ids.hpp"
#include "oransim/metrics.hpp"
#include "oransim/radio.hpp"
#include "oransim/random.hpp"
#include "oransim/report.hpp"
#include "oransim/sweep.hpp"
